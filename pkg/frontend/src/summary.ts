// Read-only statistics dashboard. Every figure is the API value, formatted
// but never recomputed.

import type { Summary } from "./api.js";
import { clear, el } from "./dom.js";
import { formatRate } from "./format.js";
import type { SessionStore } from "./state.js";

export class SummaryScreen {
  summary: Summary | null = null;
  policy = "majority";

  constructor(private root: HTMLElement, private store: SessionStore) {}

  async load(): Promise<void> {
    this.summary = await this.store.api.summary(this.policy);
    this.render();
  }

  render(): void {
    clear(this.root);
    const summary = this.summary;
    if (!summary) return;

    const policyRow = el("div", "policy-row");
    policyRow.appendChild(el("label", undefined, "Consensus policy: "));
    const select = el("select", "policy-select");
    for (const policy of ["majority", "any_positive"]) {
      const option = el("option", undefined, policy);
      option.value = policy;
      if (policy === this.policy) option.selected = true;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      this.policy = select.value;
      void this.load();
    });
    policyRow.appendChild(select);
    this.root.appendChild(policyRow);

    const table = el("table", "summary-table");
    const head = el("tr");
    for (const column of [
      "descriptor", "queries", "retrieved", "reviewed", "replicated",
      "replicated rate", "per 10k queries",
    ]) {
      head.appendChild(el("th", undefined, column));
    }
    table.appendChild(head);
    for (const [kind, stats] of Object.entries(summary.per_kind)) {
      const tr = el("tr", `kind-${kind}`);
      tr.appendChild(el("td", "cell-kind", kind));
      tr.appendChild(el("td", "cell-queries", String(stats.queries)));
      tr.appendChild(el("td", "cell-retrieved", String(stats.retrieved)));
      tr.appendChild(el("td", "cell-reviewed", String(stats.reviewed)));
      tr.appendChild(el("td", "cell-replicated", String(stats.replicated)));
      tr.appendChild(el("td", "cell-rate", formatRate(stats.replicated_rate)));
      tr.appendChild(el("td", "cell-per10k", formatRate(stats.replicated_per_10k_queries)));
      table.appendChild(tr);
    }
    this.root.appendChild(table);

    const overlapEntries = Object.entries(summary.overlap);
    if (overlapEntries.length > 0) {
      const overlap = el("p", "overlap");
      overlap.textContent =
        "Replicated-set overlap across descriptors: " +
        overlapEntries.map(([pair, count]) => `${pair}: ${count}`).join(", ");
      this.root.appendChild(overlap);
    }

    const clusters = el("p", "cluster-stats");
    clusters.textContent =
      `Duplicate clusters: ${summary.clusters.total} total, ` +
      `${summary.clusters.confirmed} confirmed, ${summary.clusters.rejected} rejected, ` +
      `${summary.clusters.candidate} pending`;
    this.root.appendChild(clusters);

    this.root.appendChild(
      el("p", "verdict-count", `Verdicts recorded: ${summary.verdicts_recorded}`),
    );
  }
}
