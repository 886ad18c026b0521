// Thin typed client over the labeling service JSON API.

import type {
  AnswerResponse,
  HitView,
  Label,
  QualificationResult,
  SessionStatus,
} from "./api-types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return res.statusText || "request failed";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.url(path));
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as T;
  }

  async status(sessionId: string): Promise<SessionStatus> {
    return this.getJson(`/api/sessions/${sessionId}/status`);
  }

  /** Next HIT for the worker, or null when none is available right now. */
  async nextHit(sessionId: string, worker: string): Promise<HitView | null> {
    const res = await this.fetchImpl(
      this.url(`/api/sessions/${sessionId}/hits/next?worker=${encodeURIComponent(worker)}`),
    );
    if (res.status === 204) return null;
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as HitView;
  }

  async submitAnswer(
    sessionId: string,
    hitId: string,
    worker: string,
    pairId: string,
    label: Label,
  ): Promise<AnswerResponse> {
    const res = await this.fetchImpl(
      this.url(`/api/sessions/${sessionId}/hits/${hitId}/answers`),
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ worker, pair_id: pairId, label }),
      },
    );
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as AnswerResponse;
  }

  async submitQualification(
    sessionId: string,
    worker: string,
    answers: Label[],
  ): Promise<QualificationResult> {
    const res = await this.fetchImpl(this.url(`/api/sessions/${sessionId}/qualification`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ worker, answers }),
    });
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return (await res.json()) as QualificationResult;
  }
}
