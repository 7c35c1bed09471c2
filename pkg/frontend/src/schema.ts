/**
 * Wire-format schemas shared with the search service.
 *
 * Every interaction the console emits becomes exactly one ActivityEvent and
 * must validate here before it is posted; the same schemas also guard what
 * comes back (session state, query results), so a malformed response never
 * reaches the rendering layer.
 */
import { z } from "zod";

export const EVENT_KINDS = [
  "dialogue_utterance",
  "query_issued",
  "result_clicked",
  "profile_edit",
] as const;

export type EventKind = (typeof EVENT_KINDS)[number];

/** ISO-8601 instant, e.g. 2006-05-15T09:00:00Z or with an offset. */
const ISO_INSTANT = /^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})$/;

export const ActivityEventSchema = z
  .object({
    session_id: z.string().min(1),
    seq: z.number().int().nonnegative(),
    timestamp: z.string().regex(ISO_INSTANT, "not an ISO-8601 instant"),
    kind: z.enum(EVENT_KINDS),
    text: z.string().min(1).optional(),
    doc_id: z.string().min(1).optional(),
  })
  .superRefine((event, ctx) => {
    if (event.kind === "result_clicked" && !event.doc_id) {
      ctx.addIssue({
        code: z.ZodIssueCode.custom,
        path: ["doc_id"],
        message: "result_clicked requires doc_id",
      });
    }
    if (
      (event.kind === "dialogue_utterance" || event.kind === "query_issued") &&
      !event.text
    ) {
      ctx.addIssue({
        code: z.ZodIssueCode.custom,
        path: ["text"],
        message: `${event.kind} requires text`,
      });
    }
  });

export type ActivityEvent = z.infer<typeof ActivityEventSchema>;

const SlotSchema = z.object({ value: z.string(), source: z.string() });

export const SessionStateSchema = z.object({
  session_id: z.string(),
  user_id: z.string(),
  objective_posterior: z.record(z.string(), z.number()),
  individual_characteristics: z.record(z.string(), SlotSchema),
  context: z.record(z.string(), SlotSchema),
  activities: z.array(z.unknown()),
  evidence_ignored_count: z.number().int().nonnegative(),
});

export type SessionState = z.infer<typeof SessionStateSchema>;

export const QueryResultSchema = z.object({
  ranked: z.array(z.object({ doc_id: z.string(), score: z.number() })),
  adapted_query: z.string(),
  activated: z.boolean(),
  winning_objective: z.string().nullable(),
  objective_used: z.record(z.string(), z.number()),
  summary: z.array(z.tuple([z.string(), z.number()])),
});

export type QueryResult = z.infer<typeof QueryResultSchema>;

export const OpenSessionResponseSchema = z.object({
  session_id: z.string().min(1),
  state: SessionStateSchema,
});

export const ErrorBodySchema = z.object({
  error: z.object({
    code: z.string(),
    message: z.string(),
    field: z.string().optional(),
  }),
});

/** The activities endpoint takes the event without its session_id (that is
 * the path parameter). */
export function toWireBody(event: ActivityEvent): Omit<ActivityEvent, "session_id"> {
  const { session_id: _dropped, ...body } = event;
  return body;
}
