/**
 * Thin typed client over the service HTTP endpoints. All responses are
 * schema-checked; service errors surface as ServiceError (with the
 * machine-readable code from the error body) and transport problems as
 * NetworkError so the session layer can queue the interaction.
 */
import { z } from "zod";
import {
  ActivityEvent,
  ErrorBodySchema,
  OpenSessionResponseSchema,
  QueryResult,
  QueryResultSchema,
  SessionState,
  SessionStateSchema,
  toWireBody,
} from "./schema.js";

export interface MinimalResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<MinimalResponse>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export class NetworkError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NetworkError";
  }
}

export class MalformedResponse extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MalformedResponse";
  }
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    // Bind the global fetch so it keeps its expected receiver in browsers.
    this.fetchImpl =
      fetchImpl ?? ((url, init) => fetch(url, init) as Promise<MinimalResponse>);
  }

  private async request<T>(
    method: string,
    path: string,
    schema: z.ZodType<T>,
    body?: unknown,
  ): Promise<T> {
    let response: MinimalResponse;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(`service unreachable: ${String(err)}`);
    }
    let payload: unknown;
    try {
      payload = await response.json();
    } catch {
      throw new MalformedResponse(`non-JSON response (status ${response.status})`);
    }
    if (!response.ok) {
      const parsed = ErrorBodySchema.safeParse(payload);
      if (parsed.success) {
        const { code, message, field } = parsed.data.error;
        throw new ServiceError(response.status, code, message, field);
      }
      throw new ServiceError(response.status, "http_error",
        `unexpected status ${response.status}`);
    }
    const parsed = schema.safeParse(payload);
    if (!parsed.success) {
      throw new MalformedResponse(parsed.error.message);
    }
    return parsed.data;
  }

  async openSession(userId: string): Promise<{ session_id: string; state: SessionState }> {
    return this.request("POST", "/sessions", OpenSessionResponseSchema, {
      user_id: userId,
      declared_profile: {},
    });
  }

  async postActivity(event: ActivityEvent): Promise<SessionState> {
    const wrapped = z.object({ state: SessionStateSchema });
    const { state } = await this.request(
      "POST",
      `/sessions/${encodeURIComponent(event.session_id)}/activities`,
      wrapped,
      toWireBody(event),
    );
    return state;
  }

  async runQuery(sessionId: string, query: string): Promise<QueryResult> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/query`,
      QueryResultSchema,
      { query },
    );
  }

  async getState(sessionId: string): Promise<SessionState> {
    return this.request(
      "GET",
      `/sessions/${encodeURIComponent(sessionId)}/state`,
      SessionStateSchema,
    );
  }
}
