/**
 * Rendering: pure functions from session data to HTML strings. The only
 * DOM-touching code lives in main.ts, which keeps everything here unit-
 * testable without a browser.
 */
import {
  QueryResult,
  SessionState,
  SessionStateSchema,
} from "./schema.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface Bar {
  objective: string;
  probability: number;
  percent: number;
}

/**
 * Integer percentages via largest remainder, so the bars always add up to
 * exactly 100 no matter how the probabilities round.
 */
export function percentages(posterior: Record<string, number>): Bar[] {
  const entries = Object.entries(posterior);
  if (entries.length === 0) {
    return [];
  }
  const total = entries.reduce((sum, [, p]) => sum + p, 0) || 1;
  const scaled = entries.map(([objective, probability]) => {
    const exact = (100 * probability) / total;
    return {
      objective,
      probability,
      floor: Math.floor(exact),
      remainder: exact - Math.floor(exact),
    };
  });
  let leftover = 100 - scaled.reduce((sum, bar) => sum + bar.floor, 0);
  const byRemainder = [...scaled].sort((a, b) => b.remainder - a.remainder);
  for (const bar of byRemainder) {
    if (leftover <= 0) break;
    bar.floor += 1;
    leftover -= 1;
  }
  return scaled.map(({ objective, probability, floor }) => ({
    objective,
    probability,
    percent: floor,
  }));
}

export function renderPosteriorBars(posterior: Record<string, number>): string {
  const bars = percentages(posterior)
    .map(
      (bar) => `
  <div class="bar-row">
    <span class="bar-label">${escapeHtml(bar.objective)}</span>
    <div class="bar-track"><div class="bar-fill" style="width: ${bar.percent}%"></div></div>
    <span class="bar-value">${bar.percent}%</span>
  </div>`,
    )
    .join("");
  return `<div class="posterior-bars">${bars}\n</div>`;
}

export function renderAdaptedQuery(result: QueryResult | null): string {
  if (result === null) {
    return `<div class="adapted-query empty">no query issued yet</div>`;
  }
  const badge = result.activated
    ? `<span class="badge activated">adapted for ${escapeHtml(
        result.winning_objective ?? "",
      )}</span>`
    : `<span class="badge">unchanged</span>`;
  return `<div class="adapted-query"><code>${escapeHtml(
    result.adapted_query,
  )}</code> ${badge}</div>`;
}

export function renderResults(result: QueryResult | null): string {
  if (result === null || result.ranked.length === 0) {
    return `<ul class="results empty"></ul>`;
  }
  const items = result.ranked
    .map(
      (hit) => `
  <li class="result" data-doc-id="${escapeHtml(hit.doc_id)}">
    <button class="result-link" data-doc-id="${escapeHtml(hit.doc_id)}">${escapeHtml(
      hit.doc_id,
    )}</button>
    <span class="score">${hit.score.toFixed(3)}</span>
  </li>`,
    )
    .join("");
  return `<ul class="results">${items}\n</ul>`;
}

export function renderSummary(result: QueryResult | null): string {
  if (result === null || result.summary.length === 0) {
    return `<table class="summary empty"></table>`;
  }
  const rows = result.summary
    .map(
      ([value, count]) =>
        `\n  <tr><td>${escapeHtml(value)}</td><td>${count}</td></tr>`,
    )
    .join("");
  return `<table class="summary">${rows}\n</table>`;
}

export function renderFeed(state: SessionState): string {
  const items = state.activities
    .map((raw) => {
      const event = raw as { seq?: number; kind?: string; text?: string; doc_id?: string };
      const detail = event.text ?? event.doc_id ?? "";
      return `\n  <li><span class="seq">#${event.seq ?? "?"}</span> ${escapeHtml(
        event.kind ?? "?",
      )} ${escapeHtml(detail)}</li>`;
    })
    .join("");
  return `<ol class="feed">${items}\n</ol>`;
}

export function renderSlots(state: SessionState): string {
  const rows = [
    ...Object.entries(state.individual_characteristics),
    ...Object.entries(state.context),
  ]
    .map(
      ([slot, held]) =>
        `\n  <tr><td>${escapeHtml(slot)}</td><td>${escapeHtml(
          held.value,
        )}</td><td class="source">${escapeHtml(held.source)}</td></tr>`,
    )
    .join("");
  return `<table class="slots">${rows}\n</table>`;
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(
    message,
  )} <button data-action="retry">retry</button></div>`;
}

export function renderOfflineBanner(queued: number): string {
  return `<div class="banner offline">service unreachable; ${queued} interaction${
    queued === 1 ? "" : "s"
  } queued <button data-action="retry">retry</button></div>`;
}

export function renderSession(state: SessionState, result: QueryResult | null): string {
  return [
    `<section class="panel" id="posterior"><h2>Inferred objective</h2>`,
    renderPosteriorBars(state.objective_posterior),
    `</section>`,
    `<section class="panel" id="adapted"><h2>Adapted query</h2>`,
    renderAdaptedQuery(result),
    `</section>`,
    `<section class="panel" id="results"><h2>Results</h2>`,
    renderResults(result),
    `</section>`,
    `<section class="panel" id="summary"><h2>Summary</h2>`,
    renderSummary(result),
    `</section>`,
    `<section class="panel" id="slots"><h2>Profile</h2>`,
    renderSlots(state),
    `</section>`,
    `<section class="panel" id="feed"><h2>Activity</h2>`,
    renderFeed(state),
    `</section>`,
  ].join("\n");
}

/**
 * Render a raw state payload; anything that does not match the schema turns
 * into an error banner instead of a crash.
 */
export function renderStateSafely(raw: unknown, result: QueryResult | null): string {
  const parsed = SessionStateSchema.safeParse(raw);
  if (!parsed.success) {
    return renderErrorBanner("the service returned a malformed session state");
  }
  return renderSession(parsed.data, result);
}
