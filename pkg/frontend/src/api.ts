/** Thin REST client; the fetch function is injectable for tests. */

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface LevelSummary {
  id: string;
  title: string;
  tutorial: boolean;
}

export interface LevelDetail extends LevelSummary {
  source: string;
  starterInputs: Record<string, unknown>;
  guarantee: string;
  parameters: string[];
  variables: Record<string, string>;
}

export interface TraceJson {
  inputs: Record<string, unknown>;
  rows: { iteration: number | string; values: Record<string, unknown> }[];
  post: Record<string, unknown>;
  printed: string[];
}

export interface StateJson {
  values: Record<string, unknown>;
  location: string;
}

export interface FeedbackJson {
  kind: string | null;
  ruleOutState: StateJson | null;
  trace: TraceJson | null;
  statePair: { before: StateJson; after: StateJson } | null;
  solved: boolean;
  removedInvariants: string[];
  promotedInvariants: string[];
  diagnostic: string | null;
}

export interface ProposeResponse {
  kind: string;
  inductive: string[];
  potential: string[];
  feedback: FeedbackJson;
  solved: boolean;
  score: number;
  scoreDelta: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class GameApi {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const data = (await response.json()) as { detail?: string };
        if (data.detail) detail = data.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listLevels(): Promise<LevelSummary[]> {
    return this.request("GET", "/api/levels");
  }

  getLevel(id: string): Promise<LevelDetail> {
    return this.request("GET", `/api/levels/${id}`);
  }

  async createSession(): Promise<string> {
    const data = await this.request<{ sessionId: string }>("POST", "/api/sessions");
    return data.sessionId;
  }

  getState(session: string, level: string): Promise<{
    inductive: string[];
    potential: string[];
    solved: boolean;
    score: number;
    history: { expr: string; kind: string }[];
  }> {
    return this.request("GET", `/api/sessions/${session}/levels/${level}/state`);
  }

  propose(session: string, level: string, expr: string): Promise<ProposeResponse> {
    return this.request("POST", `/api/sessions/${session}/levels/${level}/propose`, { expr });
  }

  trace(session: string, level: string, inputs: Record<string, string>): Promise<TraceJson> {
    return this.request("POST", `/api/sessions/${session}/levels/${level}/trace`, { inputs });
  }

  whyNot(session: string, level: string, expr: string): Promise<{
    before: StateJson;
    after: StateJson;
  }> {
    return this.request("POST", `/api/sessions/${session}/levels/${level}/whynot`, { expr });
  }
}
