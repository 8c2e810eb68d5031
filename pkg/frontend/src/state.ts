// Review-session store. Everything here is derived from server responses
// plus the unsent queue: a reload reconverges to the same screen because
// the position is the first pair this annotator has not yet reviewed.

import { TriageApi, type PairItem, type SessionInfo } from "./api.js";
import { VerdictQueue, type KeyValueStore } from "./queue.js";

export const PAIR_LABELS = ["replicated", "not_replicated", "unsure"] as const;
export type PairLabel = (typeof PAIR_LABELS)[number];

export class SessionStore {
  info: SessionInfo | null = null;
  pairs: PairItem[] = [];
  queue: VerdictQueue;
  online = true;

  constructor(
    public api: TriageApi,
    store: KeyValueStore,
    public annotator: string,
  ) {
    this.queue = new VerdictQueue((s) => api.submitVerdict(s), store);
  }

  async load(): Promise<void> {
    this.info = await this.api.session();
    const pageSize = 500;
    const pairs: PairItem[] = [];
    for (let offset = 0; ; offset += pageSize) {
      const page = await this.api.pairs(offset, pageSize);
      pairs.push(...page.items);
      if (offset + pageSize >= page.total || page.items.length === 0) break;
    }
    this.pairs = pairs;
  }

  reviewedBy(pair: PairItem, annotator = this.annotator): boolean {
    return pair.verdicts.some((v) => v.annotator === annotator);
  }

  labelBy(pair: PairItem, annotator = this.annotator): string | null {
    const verdict = pair.verdicts.find((v) => v.annotator === annotator);
    return verdict ? verdict.label : null;
  }

  /** Index of the first pair (rank order) without a verdict from this annotator. */
  currentIndex(): number {
    const index = this.pairs.findIndex((p) => !this.reviewedBy(p));
    return index === -1 ? this.pairs.length : index;
  }

  get done(): boolean {
    return this.currentIndex() >= this.pairs.length;
  }

  /** Optimistically apply a pair verdict locally and queue the submission. */
  async submitPairVerdict(pair: PairItem, label: PairLabel): Promise<boolean> {
    const existing = pair.verdicts.findIndex((v) => v.annotator === this.annotator);
    const verdict = {
      annotator: this.annotator,
      label,
      timestamp: new Date().toISOString(),
    };
    if (existing >= 0) {
      pair.verdicts[existing] = verdict;
    } else {
      pair.verdicts.push(verdict);
    }
    this.online = await this.queue.push({
      pair: { query: pair.query, reference: pair.reference },
      label,
      annotator: this.annotator,
    });
    return this.online;
  }

  async submitClusterVerdict(clusterId: number, label: "confirmed" | "rejected"): Promise<boolean> {
    this.online = await this.queue.push({
      cluster_id: clusterId,
      label,
      annotator: this.annotator,
    });
    return this.online;
  }

  /** Retry queued verdicts; used by the reconnect loop. */
  async retry(): Promise<boolean> {
    this.online = await this.queue.flush();
    return this.online;
  }
}
