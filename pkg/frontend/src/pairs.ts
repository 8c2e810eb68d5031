// Pair review screen: query and top-1 match side by side, spectrograms,
// synchronized players, scores, verdict buttons. Generated clip on the
// left, its match on the right.

import type { PairItem } from "./api.js";
import { clear, el } from "./dom.js";
import { formatScore } from "./format.js";
import { KEY_HELP } from "./keyboard.js";
import type { PairLabel, SessionStore } from "./state.js";

const LABEL_TEXT: Record<string, string> = {
  replicated: "Replicated",
  not_replicated: "Not replicated",
  unsure: "Unsure",
};

export class PairScreen {
  index = 0;
  private audios: HTMLAudioElement[] = [];

  constructor(
    private root: HTMLElement,
    private store: SessionStore,
    private onChange: () => void,
  ) {
    this.index = store.currentIndex();
  }

  get current(): PairItem | null {
    return this.store.pairs[this.index] ?? null;
  }

  goto(index: number): void {
    this.index = Math.max(0, Math.min(index, this.store.pairs.length - 1));
    this.render();
  }

  next(): void {
    if (this.index < this.store.pairs.length - 1) this.goto(this.index + 1);
    else this.render();
  }

  prev(): void {
    this.goto(this.index - 1);
  }

  /** Submit a verdict for the current pair, then advance to the next unreviewed. */
  async submit(label: PairLabel): Promise<void> {
    const pair = this.current;
    if (!pair) return;
    await this.store.submitPairVerdict(pair, label);
    const nextUnreviewed = this.store.pairs.findIndex(
      (p, i) => i > this.index && !this.store.reviewedBy(p),
    );
    this.index = nextUnreviewed === -1 ? this.store.currentIndex() : nextUnreviewed;
    this.onChange();
    this.render();
  }

  togglePlayback(): void {
    const playing = this.audios.some((a) => !a.paused);
    for (const audio of this.audios) {
      if (playing) audio.pause();
      else void audio.play().catch(() => undefined);
    }
  }

  private clipPanel(clipId: string, caption: string | null | undefined, title: string): HTMLElement {
    const panel = el("div", "clip-panel");
    panel.appendChild(el("h3", "clip-title", `${title}: ${clipId}`));
    const image = el("img", "spectrogram");
    image.src = this.store.api.spectrogramUrl(clipId);
    image.alt = `spectrogram of ${clipId}`;
    panel.appendChild(image);
    const audio = el("audio", "player");
    audio.controls = true;
    audio.preload = "none";
    audio.src = this.store.api.audioUrl(clipId);
    this.audios.push(audio);
    panel.appendChild(audio);
    if (caption) panel.appendChild(el("p", "caption", caption));
    return panel;
  }

  render(): void {
    clear(this.root);
    this.audios = [];
    const pairs = this.store.pairs;

    if (pairs.length === 0) {
      this.root.appendChild(el("p", "empty-state", "No retrieved pairs in this session."));
      return;
    }
    if (this.store.done && this.index >= pairs.length) {
      this.index = pairs.length - 1;
    }
    const pair = this.current;
    if (!pair) return;

    const header = el("div", "pair-header");
    header.appendChild(
      el("span", "pair-position", `Pair ${this.index + 1} of ${pairs.length}`),
    );
    const myLabel = this.store.labelBy(pair);
    header.appendChild(
      el("span", "pair-state", myLabel ? `your verdict: ${LABEL_TEXT[myLabel]}` : "unreviewed"),
    );
    this.root.appendChild(header);

    const panels = el("div", "pair-panels");
    panels.appendChild(this.clipPanel(pair.query, pair.query_caption, "Generated"));
    panels.appendChild(this.clipPanel(pair.reference, pair.reference_caption, "Match"));
    this.root.appendChild(panels);

    const scores = el("table", "score-table");
    const row = (name: string, value: string) => {
      const tr = el("tr");
      tr.appendChild(el("th", undefined, name));
      tr.appendChild(el("td", `score-${name}`, value));
      scores.appendChild(tr);
    };
    row("raw", formatScore(pair.raw));
    row("bias", formatScore(pair.bias));
    row("normalized", formatScore(pair.normalized));
    row("rank", String(pair.rank));
    this.root.appendChild(scores);

    const buttons = el("div", "verdict-buttons");
    (Object.keys(LABEL_TEXT) as PairLabel[]).forEach((label) => {
      const button = el("button", `verdict verdict-${label}`, LABEL_TEXT[label]);
      if (myLabel === label) button.classList.add("active");
      button.addEventListener("click", () => void this.submit(label));
      buttons.appendChild(button);
    });
    this.root.appendChild(buttons);

    const help = el("p", "key-help");
    help.textContent = KEY_HELP.map(([key, what]) => `${key} = ${what}`).join("   ");
    this.root.appendChild(help);
  }
}
