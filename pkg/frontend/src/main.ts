// App entry: tabs, annotator identity, offline banner, reconnect loop.

import { TriageApi } from "./api.js";
import { ClusterScreen } from "./clusters.js";
import { clear, el } from "./dom.js";
import { attachKeyboard } from "./keyboard.js";
import { PairScreen } from "./pairs.js";
import { SessionStore } from "./state.js";
import { SummaryScreen } from "./summary.js";

const RETRY_INTERVAL_MS = 3000;

type Tab = "pairs" | "clusters" | "summary";

function annotatorName(): string {
  let name = localStorage.getItem("repliscan.annotator");
  if (!name) {
    name = window.prompt("Annotator name for this session:") || "anonymous";
    localStorage.setItem("repliscan.annotator", name);
  }
  return name;
}

async function boot(): Promise<void> {
  const app = document.getElementById("app")!;
  const api = new TriageApi("");
  const store = new SessionStore(api, localStorage, annotatorName());

  const banner = el("div", "banner hidden");
  const header = el("header", "top-bar");
  const title = el("h1", undefined, "repliscan triage");
  const progressBadge = el("span", "progress-badge");
  const tabs = el("nav", "tabs");
  const content = el("main", "content");
  header.append(title, tabs, progressBadge);
  app.append(banner, header, content);

  try {
    await store.load();
  } catch {
    banner.className = "banner error";
    banner.textContent = "Triage service unreachable. Start it with: repliscan serve SESSION_DIR";
    return;
  }

  const rubric = el("aside", "rubric");
  rubric.textContent = store.info!.rubric;
  app.insertBefore(rubric, content);

  const pairRoot = el("div", "screen");
  const clusterRoot = el("div", "screen");
  const summaryRoot = el("div", "screen");

  const updateProgress = () => {
    const reviewed = store.pairs.filter((p) => store.reviewedBy(p)).length;
    progressBadge.textContent =
      `${store.annotator} · ${reviewed}/${store.pairs.length} reviewed` +
      (store.queue.size > 0 ? ` · ${store.queue.size} unsent` : "");
    if (!store.online) {
      banner.className = "banner error";
      banner.textContent =
        `Service unreachable — ${store.queue.size} verdicts queued locally; retrying...`;
    } else {
      banner.className = "banner hidden";
      banner.textContent = "";
    }
  };

  const pairScreen = new PairScreen(pairRoot, store, updateProgress);
  const clusterScreen = new ClusterScreen(clusterRoot, store, updateProgress);
  const summaryScreen = new SummaryScreen(summaryRoot, store);

  const screens: Record<Tab, HTMLElement> = {
    pairs: pairRoot,
    clusters: clusterRoot,
    summary: summaryRoot,
  };

  let active: Tab = "pairs";
  const select = (tab: Tab) => {
    active = tab;
    clear(content);
    content.appendChild(screens[tab]);
    for (const button of tabs.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.tab === tab);
    }
    if (tab === "pairs") pairScreen.render();
    if (tab === "clusters") void clusterScreen.load();
    if (tab === "summary") void summaryScreen.load();
  };

  for (const [tab, label] of [
    ["pairs", "Pairs"],
    ["clusters", "Clusters"],
    ["summary", "Summary"],
  ] as Array<[Tab, string]>) {
    const button = el("button", "tab", label);
    button.dataset.tab = tab;
    button.addEventListener("click", () => select(tab));
    tabs.appendChild(button);
  }

  attachKeyboard(document, {
    onLabel: (label) => {
      if (active === "pairs") void pairScreen.submit(label);
    },
    onPrev: () => {
      if (active === "pairs") pairScreen.prev();
    },
    onNext: () => {
      if (active === "pairs") pairScreen.next();
    },
    onTogglePlayback: () => {
      if (active === "pairs") pairScreen.togglePlayback();
    },
  });

  window.setInterval(() => {
    if (store.queue.size > 0) {
      void store.retry().then(updateProgress);
    }
  }, RETRY_INTERVAL_MS);

  updateProgress();
  select("pairs");
}

void boot();
