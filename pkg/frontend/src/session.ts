/**
 * One live console session: assigns client-side sequence numbers, posts
 * every interaction as exactly one ActivityEvent (validated before it goes
 * out), retries once with a fresh sequence number when the service reports
 * an ordering conflict, and queues interactions while the service is
 * unreachable so they can be flushed later in order.
 */
import {
  ActivityEvent,
  ActivityEventSchema,
  EventKind,
  QueryResult,
  SessionState,
} from "./schema.js";
import { NetworkError, ServiceError } from "./api.js";

export interface SessionApi {
  openSession(userId: string): Promise<{ session_id: string; state: SessionState }>;
  postActivity(event: ActivityEvent): Promise<SessionState>;
  runQuery(sessionId: string, query: string): Promise<QueryResult>;
  getState(sessionId: string): Promise<SessionState>;
}

export interface Interaction {
  kind: EventKind;
  text?: string;
  doc_id?: string;
}

export interface EmitOutcome {
  event: ActivityEvent;
  state: SessionState | null;
  queued: boolean;
  resequenced: boolean;
}

function isoNow(): string {
  return new Date().toISOString();
}

export class SessionController {
  state: SessionState;
  lastResult: QueryResult | null = null;
  /** Interactions that could not reach the service, oldest first. */
  readonly pending: Interaction[] = [];
  offline = false;

  private seq = 0;

  constructor(
    private readonly api: SessionApi,
    readonly sessionId: string,
    initialState: SessionState,
    private readonly clock: () => string = isoNow,
  ) {
    this.state = initialState;
  }

  static async open(
    api: SessionApi,
    userId: string,
    clock: () => string = isoNow,
  ): Promise<SessionController> {
    const opened = await api.openSession(userId);
    return new SessionController(api, opened.session_id, opened.state, clock);
  }

  private nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  private buildEvent(interaction: Interaction): ActivityEvent {
    return ActivityEventSchema.parse({
      session_id: this.sessionId,
      seq: this.nextSeq(),
      timestamp: this.clock(),
      kind: interaction.kind,
      ...(interaction.text !== undefined ? { text: interaction.text } : {}),
      ...(interaction.doc_id !== undefined ? { doc_id: interaction.doc_id } : {}),
    });
  }

  /** Post one interaction as one event; see the module comment for the
   * conflict and failure behavior. */
  async emitActivity(interaction: Interaction): Promise<EmitOutcome> {
    const event = this.buildEvent(interaction);
    try {
      const state = await this.api.postActivity(event);
      this.state = state;
      this.offline = false;
      return { event, state, queued: false, resequenced: false };
    } catch (err) {
      if (err instanceof ServiceError && err.code === "order_violation") {
        return this.retryAfterConflict(interaction);
      }
      if (err instanceof NetworkError) {
        this.pending.push(interaction);
        this.offline = true;
        return { event, state: null, queued: true, resequenced: false };
      }
      throw err;
    }
  }

  /** Re-sync the counter past whatever the service has accepted, then retry
   * exactly once; a second conflict propagates to the caller. */
  private async retryAfterConflict(interaction: Interaction): Promise<EmitOutcome> {
    const serverState = await this.api.getState(this.sessionId);
    const accepted = serverState.activities
      .map((raw) => (raw as { seq?: number }).seq ?? 0)
      .reduce((a, b) => Math.max(a, b), 0);
    this.seq = Math.max(this.seq, accepted);
    const retried = this.buildEvent(interaction);
    const state = await this.api.postActivity(retried);
    this.state = state;
    this.offline = false;
    return { event: retried, state, queued: false, resequenced: true };
  }

  /** Re-emit queued interactions in order; stops at the first failure. */
  async flushPending(): Promise<number> {
    let delivered = 0;
    while (this.pending.length > 0) {
      const interaction = this.pending[0]!;
      const outcome = await this.emitActivity(interaction);
      if (outcome.queued) {
        // emitActivity re-queued it at the tail; restore order and stop.
        this.pending.pop();
        break;
      }
      this.pending.shift();
      delivered += 1;
    }
    return delivered;
  }

  // -- the console's interaction surface ---------------------------------

  async submitDialogue(text: string): Promise<EmitOutcome> {
    return this.emitActivity({ kind: "dialogue_utterance", text });
  }

  async submitProfileEdit(slot: string, value: string): Promise<EmitOutcome> {
    return this.emitActivity({ kind: "profile_edit", text: `${slot}=${value}` });
  }

  async clickResult(docId: string): Promise<EmitOutcome> {
    return this.emitActivity({ kind: "result_clicked", doc_id: docId });
  }

  /** Record the query as an activity first, then fetch the adapted results;
   * while offline the query stays queued and no results are fetched. */
  async submitQuery(text: string): Promise<EmitOutcome> {
    const outcome = await this.emitActivity({ kind: "query_issued", text });
    if (!outcome.queued) {
      this.lastResult = await this.api.runQuery(this.sessionId, text);
    }
    return outcome;
  }
}
