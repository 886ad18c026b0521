// DOM layer: renders the session view model and forwards clicks.

import { ApiClient, FetchLike } from "./api.js";
import type { Label } from "./api-types.js";
import { SessionViewModel, WorkerSession } from "./session.js";

export interface AppConfig {
  baseUrl: string;
  sessionId: string;
  worker: string;
  pollIntervalMs?: number;
  fetchImpl?: FetchLike;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function recordCell(record: Record<string, string>, fallback: string): string {
  const entries = Object.entries(record);
  if (entries.length === 0) return `<em>${esc(fallback)}</em>`;
  return entries
    .map(([key, value]) => `<div><span class="attr">${esc(key)}:</span> ${esc(value)}</div>`)
    .join("");
}

function renderPairRows(view: SessionViewModel): string {
  const hit = view.hit;
  if (!hit) return "";
  return hit.pairs
    .map((pair) => {
      const open = view.pendingPairs.includes(pair.pair_id);
      const selected = view.selections[pair.pair_id];
      const button = (label: Label, text: string) => {
        const active = selected === label ? " active" : "";
        const disabled = open ? "" : " disabled";
        return (
          `<button class="choice${active}" data-action="select" data-pair="${esc(pair.pair_id)}"` +
          ` data-label="${label}"${disabled}>${text}</button>`
        );
      };
      const state = open
        ? selected
          ? `selected: ${selected}`
          : "unanswered"
        : "already answered";
      return `
        <div class="pair-row" data-testid="pair-row" data-pair="${esc(pair.pair_id)}">
          <div class="records">
            <div class="record">${recordCell(pair.left_record, pair.left)}</div>
            <div class="vs">same entity?</div>
            <div class="record">${recordCell(pair.right_record, pair.right)}</div>
          </div>
          <div class="controls">
            ${button("matching", "YES")}
            ${button("non-matching", "NO")}
            <span class="pair-state">${esc(state)}</span>
          </div>
        </div>`;
    })
    .join("");
}

export function renderView(view: SessionViewModel): string {
  const status = view.status;
  const progress = status
    ? `labeled ${status.labeled}/${status.total} &middot; crowdsourced ${status.crowdsourced}` +
      ` &middot; deduced ${status.deduced} &middot; open HITs ${status.open_hits}`
    : "loading status&hellip;";
  const deltas = view.lastDeltas;
  const deltaHtml =
    deltas && (deltas.published.length > 0 || deltas.deduced.length > 0)
      ? `<div class="deltas">
           ${deltas.published.length > 0
             ? `<div data-testid="delta-published">your answers unlocked ` +
               `${deltas.published.length} new pair(s): ${esc(deltas.published.join(", "))}</div>`
             : ""}
           ${deltas.deduced.length > 0
             ? `<div data-testid="delta-deduced">deduced for free: ` +
               `${esc(deltas.deduced.map(([p, l]) => `${p}=${l}`).join(", "))}</div>`
             : ""}
         </div>`
      : "";
  let body: string;
  switch (view.phase) {
    case "loading":
      body = `<p>fetching work&hellip;</p>`;
      break;
    case "answering":
    case "submitting": {
      const disabled = view.submitEnabled && view.phase === "answering" ? "" : " disabled";
      body = `
        <div class="hit" data-testid="hit" data-hit="${esc(view.hit?.hit_id ?? "")}">
          ${renderPairRows(view)}
          <button class="submit" data-testid="submit" data-action="submit"${disabled}>
            ${view.phase === "submitting" ? "submitting&hellip;" : "SUBMIT"}
          </button>
        </div>`;
      break;
    }
    case "waiting":
      body = `<p data-testid="waiting">no work available right now; watching for new pairs&hellip;</p>`;
      break;
    case "complete":
      body = `
        <div class="completion" data-testid="completion">
          <h2>session complete</h2>
          <p>crowdsourced ${status?.crowdsourced ?? "?"} &middot; deduced ${status?.deduced ?? "?"}
             of ${status?.total ?? "?"} pairs</p>
        </div>`;
      break;
    case "error":
      body = `<p class="fatal" data-testid="fatal">${esc(view.message ?? "unrecoverable error")}</p>`;
      break;
  }
  const note =
    view.phase !== "error" && view.message
      ? `<p class="note" data-testid="note">${esc(view.message)}</p>`
      : "";
  const log = view.log.length
    ? `<ul class="log">${view.log.slice(-6).map((entry) => `<li>${esc(entry)}</li>`).join("")}</ul>`
    : "";
  return `
    <header><div class="progress" data-testid="progress">${progress}</div></header>
    <main>${body}${note}${deltaHtml}${log}</main>`;
}

export function mountApp(root: HTMLElement, config: AppConfig): WorkerSession {
  const api = new ApiClient(config.baseUrl, config.fetchImpl);
  const session = new WorkerSession(api, config.sessionId, config.worker, {
    pollIntervalMs: config.pollIntervalMs,
  });
  session.onChange((view) => {
    root.innerHTML = renderView(view);
  });
  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!(target instanceof HTMLElement)) return;
    if (target.dataset.action === "select") {
      session.select(target.dataset.pair as string, target.dataset.label as Label);
    } else if (target.dataset.action === "submit") {
      void session.submit();
    }
  });
  void session.start();
  return session;
}

export function configFromLocation(location: Location): AppConfig | null {
  const params = new URLSearchParams(location.search);
  const sessionId = params.get("session");
  const worker = params.get("worker");
  if (!sessionId || !worker) return null;
  return {
    baseUrl: params.get("api") ?? "",
    sessionId,
    worker,
    pollIntervalMs: Number(params.get("poll") ?? "2000"),
  };
}
