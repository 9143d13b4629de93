/** Typed client for the synthesis job service. */

export type JobState = "queued" | "running" | "done" | "failed" | "cancelled";

export interface IncumbentSummary {
  wallClock: number;
  objective: number;
}

export interface JobSummary {
  id: string;
  state: JobState;
  solver: "sa" | "bb";
  incumbents: IncumbentSummary[];
  progress?: Record<string, unknown>;
  error?: string;
}

export interface LinkageJson {
  boxSide: number;
  boxCenter?: [number, number];
  nodes: Array<{
    index: number;
    kind: "motor" | "fixed" | "movable";
    motor?: Record<string, unknown>;
    position?: [number, number];
    parents?: [number, number];
    lengths?: [number, number];
    orientation?: 1 | -1;
  }>;
}

export interface TrajectoryJson {
  times: number[];
  positions: number[][][]; // [sample][node][xy]
}

export interface TraceResponse {
  linkage: LinkageJson;
  objective: number;
  trajectory: TrajectoryJson;
}

export interface SolutionJson {
  schema: string;
  version: number;
  solver: string;
  seed: number | null;
  objective: { total: number; tracking: number; regularization: number };
  linkage: LinkageJson;
  trajectory: TrajectoryJson;
  target: { mode: string; samples: [number, number][] };
  config: Record<string, unknown>;
  stats: Record<string, unknown>;
}

export interface JobRequest {
  solver: "sa" | "bb";
  seed?: number;
  target: { samples: [number, number][]; mode?: "fixed" | "arbitrary" };
  config: Record<string, unknown>;
  budget: Record<string, unknown>;
  initialLinkage?: LinkageJson;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly body: unknown) {
    super(`service error ${status}: ${JSON.stringify(body)}`);
  }
}

export class StudioClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, body);
    }
    return body as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/api/health");
  }

  submit(request: JobRequest): Promise<{ id: string }> {
    return this.request("/api/jobs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  }

  job(id: string): Promise<JobSummary> {
    return this.request(`/api/jobs/${id}`);
  }

  solution(id: string): Promise<SolutionJson> {
    return this.request(`/api/jobs/${id}/solution`);
  }

  trace(id: string, samples: number): Promise<TraceResponse> {
    return this.request(`/api/jobs/${id}/trace?samples=${samples}`);
  }

  cancel(id: string): Promise<{ id: string }> {
    return this.request(`/api/jobs/${id}/cancel`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "{}",
    });
  }
}
