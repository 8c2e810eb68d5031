// Keyboard-first review: single keys submit verdicts and advance. Review
// sessions run to thousands of pairs, so hands stay on the keyboard.

export interface KeyboardActions {
  onLabel(label: "replicated" | "not_replicated" | "unsure"): void;
  onPrev(): void;
  onNext(): void;
  onTogglePlayback(): void;
}

export const KEY_HELP: Array<[string, string]> = [
  ["R", "replicated"],
  ["N", "not replicated"],
  ["U", "unsure"],
  ["Space", "play / pause both clips"],
  ["← / →", "previous / next pair"],
];

export function attachKeyboard(target: EventTarget, actions: KeyboardActions): () => void {
  const handler = (event: Event) => {
    const key = (event as KeyboardEvent).key;
    const keyEvent = event as KeyboardEvent;
    if (keyEvent.ctrlKey || keyEvent.metaKey || keyEvent.altKey) return;
    const element = keyEvent.target as HTMLElement | null;
    if (element && (element.tagName === "INPUT" || element.tagName === "TEXTAREA")) return;
    switch (key.toLowerCase()) {
      case "r":
        keyEvent.preventDefault();
        actions.onLabel("replicated");
        break;
      case "n":
        keyEvent.preventDefault();
        actions.onLabel("not_replicated");
        break;
      case "u":
        keyEvent.preventDefault();
        actions.onLabel("unsure");
        break;
      case " ":
        keyEvent.preventDefault();
        actions.onTogglePlayback();
        break;
      case "arrowleft":
        keyEvent.preventDefault();
        actions.onPrev();
        break;
      case "arrowright":
        keyEvent.preventDefault();
        actions.onNext();
        break;
    }
  };
  target.addEventListener("keydown", handler);
  return () => target.removeEventListener("keydown", handler);
}
