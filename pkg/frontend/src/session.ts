// Worker-session state machine, free of DOM concerns so it can be tested
// headlessly.  The DOM layer renders whatever view() returns and forwards
// user events to select()/submit().

import { ApiError } from "./api.js";
import type { AnswerResponse, HitView, Label, SessionStatus } from "./api-types.js";

/** What the session needs from the service; ApiClient satisfies this. */
export interface SessionApi {
  status(sessionId: string): Promise<SessionStatus>;
  nextHit(sessionId: string, worker: string): Promise<HitView | null>;
  submitAnswer(
    sessionId: string,
    hitId: string,
    worker: string,
    pairId: string,
    label: Label,
  ): Promise<AnswerResponse>;
}

export type Phase =
  | "loading" // fetching the next HIT
  | "answering" // HIT on screen, collecting selections
  | "submitting"
  | "waiting" // no work available; polling for more
  | "complete"
  | "error"; // unrecoverable (unknown session, qualification refused)

export interface Deltas {
  published: string[];
  deduced: [string, Label][];
}

export interface SessionViewModel {
  phase: Phase;
  status: SessionStatus | null; // verbatim from the last /status poll
  hit: HitView | null;
  selections: Record<string, Label>;
  pendingPairs: string[]; // open pairs not yet accepted by the server
  submitEnabled: boolean;
  lastDeltas: Deltas | null; // deltas of the most recent submission
  message: string | null; // transient, non-fatal notices
  log: string[];
}

export interface SessionOptions {
  pollIntervalMs?: number; // 0 disables the automatic timer (tests poll manually)
}

export class WorkerSession {
  private phase: Phase = "loading";
  private status: SessionStatus | null = null;
  private hit: HitView | null = null;
  private selections: Record<string, Label> = {};
  private submitted = new Set<string>();
  private lastDeltas: Deltas | null = null;
  private message: string | null = null;
  private log: string[] = [];
  private listeners: Array<(view: SessionViewModel) => void> = [];
  private timer: ReturnType<typeof setTimeout> | null = null;
  private readonly pollIntervalMs: number;

  constructor(
    private readonly api: SessionApi,
    private readonly sessionId: string,
    private readonly worker: string,
    options: SessionOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 2000;
  }

  onChange(listener: (view: SessionViewModel) => void): void {
    this.listeners.push(listener);
  }

  view(): SessionViewModel {
    const open = this.hit ? this.hit.open.filter((p) => !this.submitted.has(p)) : [];
    return {
      phase: this.phase,
      status: this.status,
      hit: this.hit,
      selections: { ...this.selections },
      pendingPairs: open,
      submitEnabled:
        this.phase === "answering" &&
        open.length > 0 &&
        open.every((p) => this.selections[p] !== undefined),
      lastDeltas: this.lastDeltas,
      message: this.message,
      log: [...this.log],
    };
  }

  private emit(): void {
    const snapshot = this.view();
    for (const listener of this.listeners) listener(snapshot);
  }

  private scheduleNextPoll(): void {
    if (this.pollIntervalMs <= 0) return;
    if (this.timer) clearTimeout(this.timer);
    if (this.phase === "complete" || this.phase === "error") return;
    this.timer = setTimeout(() => {
      void this.pollOnce();
    }, this.pollIntervalMs);
  }

  stop(): void {
    if (this.timer) clearTimeout(this.timer);
    this.timer = null;
  }

  async start(): Promise<void> {
    await this.refreshStatus();
    await this.fetchNextHit();
  }

  private async refreshStatus(): Promise<void> {
    this.status = await this.api.status(this.sessionId);
  }

  /** Fetch the next HIT, or settle into waiting/complete. */
  async fetchNextHit(): Promise<void> {
    this.phase = "loading";
    this.emit();
    try {
      if (this.status?.complete) {
        this.phase = "complete";
        this.stop();
        this.emit();
        return;
      }
      const hit = await this.api.nextHit(this.sessionId, this.worker);
      if (hit === null || hit.open.length === 0) {
        this.hit = null;
        this.phase = this.status?.complete ? "complete" : "waiting";
      } else {
        this.hit = hit;
        this.selections = {};
        this.submitted = new Set();
        this.phase = "answering";
      }
    } catch (err) {
      if (err instanceof ApiError && (err.status === 404 || err.status === 403)) {
        this.phase = "error";
        this.message = err.detail;
      } else {
        this.phase = "waiting";
        this.message = err instanceof Error ? err.message : String(err);
      }
    }
    this.scheduleNextPoll();
    this.emit();
  }

  select(pairId: string, label: Label): void {
    if (this.phase !== "answering" || !this.hit) return;
    if (!this.hit.open.includes(pairId)) return;
    this.selections[pairId] = label;
    this.emit();
  }

  /** Post every selected answer; partially failed submissions stay retriable
   * without double counting (an "already answered" rejection marks the pair
   * as delivered). */
  async submit(): Promise<void> {
    if (!this.view().submitEnabled || !this.hit) return;
    this.phase = "submitting";
    this.message = null;
    this.emit();
    const deltas: Deltas = { published: [], deduced: [] };
    let failed = false;
    for (const pairId of this.hit.open) {
      if (this.submitted.has(pairId)) continue;
      const label = this.selections[pairId];
      try {
        const response = await this.api.submitAnswer(
          this.sessionId,
          this.hit.hit_id,
          this.worker,
          pairId,
          label,
        );
        this.submitted.add(pairId);
        deltas.published.push(...response.newly_published);
        deltas.deduced.push(...response.newly_deduced);
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          this.submitted.add(pairId); // already recorded server-side
        } else {
          failed = true;
          this.message =
            (err instanceof Error ? err.message : String(err)) +
            " - remaining answers kept, press submit to retry";
          break;
        }
      }
    }
    this.lastDeltas = deltas;
    if (deltas.published.length > 0) {
      this.log.push(`your answers unlocked ${deltas.published.length} pair(s): ${deltas.published.join(", ")}`);
    }
    if (deltas.deduced.length > 0) {
      this.log.push(
        `deduced for free: ${deltas.deduced.map(([p, l]) => `${p}=${l}`).join(", ")}`,
      );
    }
    try {
      await this.refreshStatus();
    } catch {
      // keep the stale status; the next poll refreshes it
    }
    if (failed) {
      this.phase = "answering";
      this.scheduleNextPoll();
      this.emit();
      return;
    }
    await this.fetchNextHit();
  }

  /** One poll tick: refresh counters, and look for work while waiting. */
  async pollOnce(): Promise<void> {
    try {
      await this.refreshStatus();
      if (this.phase === "waiting" || this.phase === "loading") {
        await this.fetchNextHit();
        return;
      }
      if (this.status?.complete && this.phase !== "complete") {
        this.phase = "complete";
        this.stop();
      }
    } catch (err) {
      this.message = err instanceof Error ? err.message : String(err);
    }
    this.scheduleNextPoll();
    this.emit();
  }
}
