import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  ActivityEventSchema,
  QueryResultSchema,
  SessionStateSchema,
  toWireBody,
} from "../src/schema.js";

const FIXTURES = join(__dirname, "..", "fixtures");

const recorded = JSON.parse(
  readFileSync(join(FIXTURES, "recorded_session.json"), "utf-8"),
);

describe("ActivityEvent schema against recorded service traffic", () => {
  const logLines = readFileSync(join(FIXTURES, "console_log.jsonl"), "utf-8")
    .trim()
    .split("\n")
    .map((line) => JSON.parse(line));

  it("accepts every event the service accepted", () => {
    for (const line of logLines) {
      const parsed = ActivityEventSchema.safeParse(line);
      expect(parsed.success, JSON.stringify(line)).toBe(true);
    }
  });

  it("covers all four interaction kinds in the recording", () => {
    const kinds = new Set(logLines.map((line) => line.kind));
    expect(kinds).toEqual(
      new Set(["profile_edit", "dialogue_utterance", "query_issued", "result_clicked"]),
    );
  });

  it("wire bodies match what was actually posted", () => {
    recorded.activities.forEach((entry: { body: unknown }, i: number) => {
      const event = ActivityEventSchema.parse(logLines[i]);
      expect(toWireBody(event)).toEqual(entry.body);
    });
  });
});

describe("response schemas against recorded service payloads", () => {
  it("accepts every recorded state snapshot", () => {
    for (const entry of recorded.activities) {
      expect(SessionStateSchema.safeParse(entry.state).success).toBe(true);
    }
    expect(SessionStateSchema.safeParse(recorded.final_state).success).toBe(true);
  });

  it("accepts the recorded query result", () => {
    expect(QueryResultSchema.safeParse(recorded.query_result).success).toBe(true);
  });

  it("posteriors in recorded states are distributions", () => {
    const posterior = recorded.final_state.objective_posterior as Record<string, number>;
    const total = Object.values(posterior).reduce((a, b) => a + b, 0);
    expect(Math.abs(total - 1)).toBeLessThan(1e-9);
    for (const p of Object.values(posterior)) {
      expect(p).toBeGreaterThanOrEqual(0);
    }
  });
});

describe("schema rejections", () => {
  const base = {
    session_id: "s-000001",
    seq: 1,
    timestamp: "2006-05-15T09:00:00Z",
  };

  it("rejects clicks without doc_id", () => {
    expect(
      ActivityEventSchema.safeParse({ ...base, kind: "result_clicked" }).success,
    ).toBe(false);
  });

  it("rejects utterances and queries without text", () => {
    for (const kind of ["dialogue_utterance", "query_issued"]) {
      expect(ActivityEventSchema.safeParse({ ...base, kind }).success).toBe(false);
    }
  });

  it("rejects unknown kinds, bad timestamps and bad seqs", () => {
    expect(
      ActivityEventSchema.safeParse({ ...base, kind: "hovered", text: "x" }).success,
    ).toBe(false);
    expect(
      ActivityEventSchema.safeParse({
        ...base,
        kind: "dialogue_utterance",
        text: "x",
        timestamp: "yesterday",
      }).success,
    ).toBe(false);
    expect(
      ActivityEventSchema.safeParse({
        ...base,
        seq: -1,
        kind: "dialogue_utterance",
        text: "x",
      }).success,
    ).toBe(false);
    expect(
      ActivityEventSchema.safeParse({
        ...base,
        seq: 1.5,
        kind: "dialogue_utterance",
        text: "x",
      }).success,
    ).toBe(false);
  });
});
