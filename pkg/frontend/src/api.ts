// Typed client for the triage HTTP API. Every number the UI shows comes
// straight from these payloads; nothing is recomputed client-side.

export interface ResultInfo {
  kind: string;
  queries: number;
  retrieved: number;
  path: string;
}

export interface Progress {
  pairs: number;
  reviewed: number;
  remaining: number;
  by_label: Record<string, number>;
}

export interface SessionInfo {
  session_dir: string;
  results: ResultInfo[];
  clusters: number;
  progress: Progress;
  rubric: string;
}

export interface VerdictState {
  annotator: string;
  label: string;
  timestamp: string;
  note?: string | null;
}

export interface PairItem {
  query: string;
  reference: string;
  kind: string;
  raw: number;
  bias: number;
  normalized: number;
  rank: number;
  query_caption?: string | null;
  reference_caption?: string | null;
  verdicts: VerdictState[];
  consensus?: string | null;
}

export interface PairPage {
  total: number;
  offset: number;
  items: PairItem[];
}

export interface EdgeScore {
  a: string;
  b: string;
  score_ab: number;
  score_ba: number;
}

export interface ClusterItem {
  component_id: number;
  members: string[];
  pairwise_scores: EdgeScore[];
  status: string;
  verdicts: VerdictState[];
}

export interface ClusterPage {
  total: number;
  items: ClusterItem[];
}

export interface KindSummary {
  queries: number;
  retrieved: number;
  reviewed: number;
  by_label: Record<string, number>;
  replicated: number;
  replicated_rate: number | null;
  replicated_per_10k_queries: number | null;
}

export interface Summary {
  policy: string;
  per_kind: Record<string, KindSummary>;
  overlap: Record<string, number>;
  clusters: { total: number; confirmed: number; rejected: number; candidate: number };
  verdicts_recorded: number;
}

export interface VerdictSubmission {
  pair?: { query: string; reference: string };
  cluster_id?: number;
  label: string;
  annotator: string;
  note?: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class TriageApi {
  constructor(private baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) {
      throw new ApiError(response.status, `GET ${path} -> ${response.status}`);
    }
    return (await response.json()) as T;
  }

  session(): Promise<SessionInfo> {
    return this.getJson("/api/session");
  }

  pairs(offset = 0, limit = 1000, filter = "all"): Promise<PairPage> {
    return this.getJson(`/api/pairs?offset=${offset}&limit=${limit}&filter=${filter}`);
  }

  clusters(): Promise<ClusterPage> {
    return this.getJson("/api/clusters");
  }

  summary(policy = "majority"): Promise<Summary> {
    return this.getJson(`/api/summary?policy=${policy}`);
  }

  async submitVerdict(submission: VerdictSubmission): Promise<void> {
    const response = await fetch(this.baseUrl + "/api/verdicts", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(submission),
    });
    if (!response.ok) {
      throw new ApiError(response.status, `POST /api/verdicts -> ${response.status}`);
    }
  }

  audioUrl(clipId: string): string {
    return `${this.baseUrl}/api/clips/${encodeURIComponent(clipId)}/audio`;
  }

  spectrogramUrl(clipId: string): string {
    return `${this.baseUrl}/api/clips/${encodeURIComponent(clipId)}/spectrogram`;
  }
}
