// Cluster review screen: duplicate candidates, largest first, every member
// playable, confirm/reject per cluster.

import type { ClusterItem } from "./api.js";
import { clear, el } from "./dom.js";
import { formatScore } from "./format.js";
import type { SessionStore } from "./state.js";

export class ClusterScreen {
  clusters: ClusterItem[] = [];

  constructor(
    private root: HTMLElement,
    private store: SessionStore,
    private onChange: () => void,
  ) {}

  async load(): Promise<void> {
    const page = await this.store.api.clusters();
    this.clusters = [...page.items].sort(
      (a, b) => b.members.length - a.members.length || a.component_id - b.component_id,
    );
    this.render();
  }

  private async decide(cluster: ClusterItem, label: "confirmed" | "rejected"): Promise<void> {
    await this.store.submitClusterVerdict(cluster.component_id, label);
    cluster.status = label;
    this.onChange();
    this.render();
  }

  render(): void {
    clear(this.root);
    if (this.clusters.length === 0) {
      this.root.appendChild(el("p", "empty-state", "No duplicate clusters in this session."));
      return;
    }
    for (const cluster of this.clusters) {
      const card = el("div", `cluster-card status-${cluster.status}`);
      card.appendChild(
        el(
          "h3",
          "cluster-title",
          `Cluster ${cluster.component_id} — ${cluster.members.length} clips (${cluster.status})`,
        ),
      );
      const members = el("div", "cluster-members");
      for (const clipId of cluster.members) {
        const member = el("div", "cluster-member");
        member.appendChild(el("span", "member-id", clipId));
        const audio = el("audio");
        audio.controls = true;
        audio.preload = "none";
        audio.src = this.store.api.audioUrl(clipId);
        member.appendChild(audio);
        members.appendChild(member);
      }
      card.appendChild(members);

      if (cluster.pairwise_scores.length > 0) {
        const edges = el("p", "cluster-edges");
        edges.textContent = cluster.pairwise_scores
          .map((e) => `${e.a}↔${e.b}: ${formatScore(e.score_ab)} / ${formatScore(e.score_ba)}`)
          .join("   ");
        card.appendChild(edges);
      }

      const buttons = el("div", "verdict-buttons");
      for (const label of ["confirmed", "rejected"] as const) {
        const button = el(
          "button",
          `verdict verdict-${label}`,
          label === "confirmed" ? "Confirm duplicates" : "Reject",
        );
        if (cluster.status === label) button.classList.add("active");
        button.addEventListener("click", () => void this.decide(cluster, label));
        buttons.appendChild(button);
      }
      card.appendChild(buttons);
      this.root.appendChild(card);
    }
  }
}
