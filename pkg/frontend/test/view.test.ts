import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { QueryResult, SessionState } from "../src/schema.js";
import {
  percentages,
  renderAdaptedQuery,
  renderErrorBanner,
  renderPosteriorBars,
  renderResults,
  renderSession,
  renderStateSafely,
  renderSummary,
} from "../src/view.js";

const FIXTURES = join(__dirname, "..", "fixtures");
const recorded = JSON.parse(
  readFileSync(join(FIXTURES, "recorded_session.json"), "utf-8"),
);
const finalState = recorded.final_state as SessionState;
const queryResult = recorded.query_result as QueryResult;

describe("posterior bars", () => {
  it("percentages always sum to exactly 100", () => {
    const cases: Record<string, number>[] = [
      finalState.objective_posterior,
      { a: 1 / 3, b: 1 / 3, c: 1 / 3 },
      { a: 0.999, b: 0.0005, c: 0.0005 },
      { a: 0.215, b: 0.215, c: 0.215, d: 0.355 },
      { only: 1.0 },
    ];
    for (const posterior of cases) {
      const total = percentages(posterior).reduce((s, bar) => s + bar.percent, 0);
      expect(total).toBe(100);
    }
  });

  it("a fresh session renders near-uniform bars", () => {
    const opened = recorded.open.response.state as SessionState;
    const bars = percentages(opened.objective_posterior);
    for (const bar of bars) {
      expect(bar.percent).toBeGreaterThanOrEqual(33);
      expect(bar.percent).toBeLessThanOrEqual(34);
    }
  });

  it("after the recorded session the journal-list bar is the maximum", () => {
    const bars = percentages(finalState.objective_posterior);
    const top = [...bars].sort((a, b) => b.percent - a.percent)[0]!;
    expect(top.objective).toBe("journal_list_for_team");
  });

  it("renders one row per objective with its percent", () => {
    const html = renderPosteriorBars(finalState.objective_posterior);
    for (const bar of percentages(finalState.objective_posterior)) {
      expect(html).toContain(bar.objective);
      expect(html).toContain(`${bar.percent}%`);
    }
  });
});

describe("adapted query display", () => {
  it("shows the service's adapted query verbatim (escaped)", () => {
    const html = renderAdaptedQuery(queryResult);
    expect(html).toContain("year&gt;=2003");
    expect(html).toContain("team=t-dmg");
    expect(html).toContain("activated");
  });

  it("handles the no-query state", () => {
    expect(renderAdaptedQuery(null)).toContain("no query issued yet");
  });
});

describe("results and summary", () => {
  it("each hit is clickable via its doc id", () => {
    const html = renderResults(queryResult);
    for (const hit of queryResult.ranked) {
      expect(html).toContain(`data-doc-id="${hit.doc_id}"`);
    }
  });

  it("summary rows carry group and count", () => {
    const html = renderSummary(queryResult);
    for (const [value, count] of queryResult.summary) {
      expect(html).toContain(value);
      expect(html).toContain(`<td>${count}</td>`);
    }
  });
});

describe("whole-session rendering", () => {
  it("renders every panel from the recorded final state", () => {
    const html = renderSession(finalState, queryResult);
    for (const panel of ["posterior", "adapted", "results", "summary", "slots", "feed"]) {
      expect(html).toContain(`id="${panel}"`);
    }
    expect(html).toContain("journal_list_for_team");
    expect(html).toContain("t-dmg");
  });

  it("malformed state turns into an error banner, not a crash", () => {
    for (const broken of [null, 42, {}, { objective_posterior: "nope" },
                          { ...finalState, objective_posterior: "x" }]) {
      const html = renderStateSafely(broken, null);
      expect(html).toContain("banner error");
      expect(html).toContain("malformed");
    }
  });

  it("valid state renders normally through the safe path", () => {
    expect(renderStateSafely(finalState, queryResult)).toContain("posterior");
  });
});

describe("escaping", () => {
  it("escapes markup in error banners", () => {
    const html = renderErrorBanner("<script>alert(1)</script>");
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});
