/** Job-panel controller: submit, poll, chart incumbents, adopt-and-refine.
 *
 * The state machine mirrors the server's states exactly; polling defaults to
 * 1 Hz with at most one in-flight poll per job.
 */

import {
  ApiError,
  JobRequest,
  JobState,
  JobSummary,
  LinkageJson,
  SolutionJson,
  StudioClient,
  TraceResponse,
} from "./api.js";

export interface ChartPoint {
  wallClock: number;
  objective: number;
}

export interface PanelView {
  jobId: string | null;
  state: JobState | "idle";
  chart: ChartPoint[];
  bestObjective: number | null;
  error: string | null;
}

export interface PanelOptions {
  pollIntervalMs?: number;
  onUpdate?: (view: PanelView) => void;
}

export class JobPanelController {
  private jobId: string | null = null;
  private state: JobState | "idle" = "idle";
  private chart: ChartPoint[] = [];
  private error: string | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private polling = false;
  private lastRequest: JobRequest | null = null;
  private readonly pollIntervalMs: number;
  private readonly onUpdate: (view: PanelView) => void;

  constructor(readonly client: StudioClient, options: PanelOptions = {}) {
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
    this.onUpdate = options.onUpdate ?? (() => undefined);
  }

  view(): PanelView {
    const best = this.chart.length ? this.chart[this.chart.length - 1].objective : null;
    return {
      jobId: this.jobId,
      state: this.state,
      chart: this.chart.slice(),
      bestObjective: best,
      error: this.error,
    };
  }

  async submit(request: JobRequest): Promise<string> {
    this.stopPolling();
    this.chart = [];
    this.error = null;
    this.lastRequest = request;
    const { id } = await this.client.submit(request);
    this.jobId = id;
    this.state = "queued";
    this.emit();
    this.schedulePoll();
    return id;
  }

  /** Re-seed a fresh job from the latest incumbent with edited settings. */
  async adoptAndRefine(overrides: Partial<JobRequest> = {}): Promise<string> {
    if (this.jobId === null || this.lastRequest === null) {
      throw new Error("no job to adopt");
    }
    const latest = await this.client.trace(this.jobId, 8);
    const request: JobRequest = {
      ...this.lastRequest,
      ...overrides,
      config: { ...this.lastRequest.config, ...(overrides.config ?? {}) },
      budget: { ...this.lastRequest.budget, ...(overrides.budget ?? {}) },
      initialLinkage: latest.linkage,
    };
    return this.submit(request);
  }

  async cancel(): Promise<void> {
    if (this.jobId === null) {
      return;
    }
    await this.client.cancel(this.jobId);
    await this.pollOnce();
  }

  async solution(): Promise<SolutionJson> {
    if (this.jobId === null) {
      throw new Error("no job submitted");
    }
    return this.client.solution(this.jobId);
  }

  async latestTrace(samples: number): Promise<TraceResponse> {
    if (this.jobId === null) {
      throw new Error("no job submitted");
    }
    return this.client.trace(this.jobId, samples);
  }

  /** Poll until the job reaches a terminal state (used by headless flows). */
  async waitForTerminal(timeoutMs = 120000, stepMs = 50): Promise<JobState> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
      await this.pollOnce();
      if (this.state === "done" || this.state === "failed" || this.state === "cancelled") {
        return this.state;
      }
      await new Promise((resolve) => setTimeout(resolve, stepMs));
    }
    throw new Error(`job still ${this.state} after ${timeoutMs} ms`);
  }

  async pollOnce(): Promise<void> {
    if (this.jobId === null || this.polling) {
      return;
    }
    this.polling = true;
    try {
      const job: JobSummary = await this.client.job(this.jobId);
      this.state = job.state;
      this.chart = job.incumbents.map((e) => ({
        wallClock: e.wallClock,
        objective: e.objective,
      }));
      this.error = job.error ?? null;
      this.emit();
    } catch (err) {
      if (err instanceof ApiError) {
        this.error = `service: ${err.status}`;
        this.emit();
      } else {
        throw err;
      }
    } finally {
      this.polling = false;
    }
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private schedulePoll(): void {
    this.stopPolling();
    this.timer = setTimeout(async () => {
      await this.pollOnce();
      if (this.state === "queued" || this.state === "running") {
        this.schedulePoll();
      }
    }, this.pollIntervalMs);
  }

  private emit(): void {
    this.onUpdate(this.view());
  }
}
