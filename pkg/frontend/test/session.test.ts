import { describe, expect, it } from "vitest";

import { NetworkError, ServiceError } from "../src/api.js";
import { ActivityEvent, ActivityEventSchema, SessionState } from "../src/schema.js";
import { Interaction, SessionApi, SessionController } from "../src/session.js";

const fixedClock = () => "2006-05-15T09:00:00Z";

function emptyState(activities: unknown[] = []): SessionState {
  return {
    session_id: "s-000001",
    user_id: "console",
    objective_posterior: { a: 0.5, b: 0.5 },
    individual_characteristics: {},
    context: {},
    activities,
    evidence_ignored_count: 0,
  };
}

/** Scriptable fake service: `behaviors` is consumed one entry per
 * postActivity call ("ok" | "conflict" | "down"). */
class FakeApi implements SessionApi {
  posted: ActivityEvent[] = [];
  queries: string[] = [];
  stateCalls = 0;
  serverSeq = 0;

  constructor(private behaviors: ("ok" | "conflict" | "down")[] = []) {}

  async openSession(_userId: string) {
    return { session_id: "s-000001", state: emptyState() };
  }

  private activities(): unknown[] {
    // What the real service reports: every accepted event, including ones
    // this console never saw (serverSeq models a foreign writer).
    const known = this.posted.map((e) => ({ seq: e.seq, kind: e.kind }));
    if (this.serverSeq > 0 && !this.posted.some((e) => e.seq === this.serverSeq)) {
      known.unshift({ seq: this.serverSeq, kind: "dialogue_utterance" });
    }
    return known;
  }

  async postActivity(event: ActivityEvent): Promise<SessionState> {
    const behavior = this.behaviors.shift() ?? "ok";
    if (behavior === "down") {
      throw new NetworkError("connection refused");
    }
    if (behavior === "conflict" || event.seq <= this.serverSeq) {
      throw new ServiceError(409, "order_violation", "seq not greater");
    }
    this.serverSeq = event.seq;
    this.posted.push(event);
    return emptyState(this.activities());
  }

  async runQuery(_sessionId: string, query: string) {
    this.queries.push(query);
    return {
      ranked: [{ doc_id: "d001", score: 0.5 }],
      adapted_query: query,
      activated: false,
      winning_objective: null,
      objective_used: { a: 0.5, b: 0.5 },
      summary: [["Data Mining Review", 1]] as [string, number][],
    };
  }

  async getState(_sessionId: string) {
    this.stateCalls += 1;
    return emptyState(this.activities());
  }
}

async function openController(api: SessionApi) {
  return SessionController.open(api, "console", fixedClock);
}

describe("every interaction emits exactly one schema-valid event", () => {
  it("dialogue submit", async () => {
    const api = new FakeApi();
    const controller = await openController(api);
    const outcome = await controller.submitDialogue("hello world");
    expect(api.posted).toHaveLength(1);
    expect(outcome.event.kind).toBe("dialogue_utterance");
    expect(outcome.event.text).toBe("hello world");
    expect(ActivityEventSchema.safeParse(outcome.event).success).toBe(true);
  });

  it("result click carries the doc_id", async () => {
    const api = new FakeApi();
    const controller = await openController(api);
    const outcome = await controller.clickResult("d007");
    expect(outcome.event.kind).toBe("result_clicked");
    expect(outcome.event.doc_id).toBe("d007");
    expect(ActivityEventSchema.safeParse(outcome.event).success).toBe(true);
  });

  it("profile edit becomes slot=value text", async () => {
    const api = new FakeApi();
    const controller = await openController(api);
    const outcome = await controller.submitProfileEdit("team", "t-dmg");
    expect(outcome.event.kind).toBe("profile_edit");
    expect(outcome.event.text).toBe("team=t-dmg");
  });

  it("query issues the event before fetching results", async () => {
    const api = new FakeApi();
    const controller = await openController(api);
    await controller.submitQuery("clustering OR ranking");
    expect(api.posted.map((e) => e.kind)).toEqual(["query_issued"]);
    expect(api.queries).toEqual(["clustering OR ranking"]);
    expect(controller.lastResult?.adapted_query).toBe("clustering OR ranking");
  });
});

describe("sequence numbers", () => {
  it("rapid interactions get strictly increasing seqs", async () => {
    const api = new FakeApi();
    const controller = await openController(api);
    await controller.clickResult("d001");
    await controller.clickResult("d001");
    await controller.submitDialogue("and a third");
    const seqs = api.posted.map((e) => e.seq);
    expect(seqs).toEqual([1, 2, 3]);
  });

  it("order violation re-syncs from the server and retries once", async () => {
    const api = new FakeApi(["conflict"]);
    api.serverSeq = 7; // someone else advanced the session
    const controller = await openController(api);
    const outcome = await controller.submitDialogue("catching up");
    expect(outcome.resequenced).toBe(true);
    expect(outcome.event.seq).toBeGreaterThan(7);
    expect(api.posted).toHaveLength(1);
    expect(api.stateCalls).toBe(1);
  });

  it("a second conflict propagates instead of looping", async () => {
    const api = new FakeApi(["conflict", "conflict"]);
    const controller = await openController(api);
    await expect(controller.submitDialogue("never lands")).rejects.toThrow(
      ServiceError,
    );
  });
});

describe("network failures", () => {
  it("queues the interaction and flags offline", async () => {
    const api = new FakeApi(["down"]);
    const controller = await openController(api);
    const outcome = await controller.submitDialogue("lost in transit");
    expect(outcome.queued).toBe(true);
    expect(controller.offline).toBe(true);
    expect(controller.pending).toHaveLength(1);
    expect(api.posted).toHaveLength(0);
  });

  it("flushPending delivers queued interactions in order", async () => {
    const api = new FakeApi(["down", "down"]);
    const controller = await openController(api);
    await controller.submitDialogue("first");
    await controller.submitProfileEdit("team", "t-dmg");
    expect(controller.pending).toHaveLength(2);

    const delivered = await controller.flushPending();
    expect(delivered).toBe(2);
    expect(controller.pending).toHaveLength(0);
    expect(controller.offline).toBe(false);
    expect(api.posted.map((e) => [e.kind, e.text ?? e.doc_id])).toEqual([
      ["dialogue_utterance", "first"],
      ["profile_edit", "team=t-dmg"],
    ]);
    // Delivered events still carry fresh, increasing seqs.
    const seqs = api.posted.map((e) => e.seq);
    expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
  });

  it("flushPending stops when the service is still down", async () => {
    const api = new FakeApi(["down", "down"]);
    const controller = await openController(api);
    await controller.submitDialogue("first");
    const delivered = await controller.flushPending();
    expect(delivered).toBe(0);
    expect(controller.pending).toHaveLength(1);
    expect(controller.offline).toBe(true);
  });

  it("a queued query does not fetch results", async () => {
    const api = new FakeApi(["down"]);
    const controller = await openController(api);
    await controller.submitQuery("ranking");
    expect(controller.lastResult).toBeNull();
    expect(api.queries).toHaveLength(0);
  });
});

describe("interaction validation", () => {
  it("refuses to build an invalid event", async () => {
    const api = new FakeApi();
    const controller = await openController(api);
    const bad: Interaction = { kind: "result_clicked" }; // no doc_id
    await expect(controller.emitActivity(bad)).rejects.toThrow();
    expect(api.posted).toHaveLength(0);
  });
});
