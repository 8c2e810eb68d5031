// Unsent-verdict queue: the only client-side state beyond the annotator
// name. Submissions are optimistic; failures stay queued (and survive a
// reload via storage) until a flush succeeds, so nothing is silently lost.

import type { VerdictSubmission } from "./api.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

export type SubmitFn = (submission: VerdictSubmission) => Promise<void>;

export class VerdictQueue {
  private pending: VerdictSubmission[] = [];

  constructor(
    private submit: SubmitFn,
    private store: KeyValueStore,
    private storageKey = "repliscan.unsent-verdicts",
  ) {
    const saved = this.store.getItem(this.storageKey);
    if (saved) {
      try {
        this.pending = JSON.parse(saved) as VerdictSubmission[];
      } catch {
        this.pending = [];
      }
    }
  }

  get size(): number {
    return this.pending.length;
  }

  private persist(): void {
    this.store.setItem(this.storageKey, JSON.stringify(this.pending));
  }

  /** Queue a submission and immediately try to flush everything. */
  async push(submission: VerdictSubmission): Promise<boolean> {
    this.pending.push(submission);
    this.persist();
    return this.flush();
  }

  /** Send queued submissions in order; stops at the first failure. */
  async flush(): Promise<boolean> {
    while (this.pending.length > 0) {
      try {
        await this.submit(this.pending[0]);
      } catch {
        this.persist();
        return false;
      }
      this.pending.shift();
      this.persist();
    }
    return true;
  }
}
