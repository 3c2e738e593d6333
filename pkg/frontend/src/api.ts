/**
 * Stateless HTTP client for the debugger service.
 *
 * One method per endpoint; every response is schema-validated before it is
 * handed to the caller. Display toggles travel as query parameters, so the
 * server never holds per-client view preferences.
 */
import {
  Action,
  SessionInfo,
  SessionView,
  parseSessionView,
  sessionInfoSchema,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.name = "ApiError";
  }
}

export interface ViewQuery {
  step?: number;
  filterHeap?: boolean;
  autoMinimize?: boolean;
}

export function viewQueryString(query: ViewQuery): string {
  const params = new URLSearchParams();
  if (query.step !== undefined) params.set("step", String(query.step));
  if (query.filterHeap !== undefined) params.set("filterHeap", String(query.filterHeap));
  if (query.autoMinimize !== undefined) params.set("autoMinimize", String(query.autoMinimize));
  const text = params.toString();
  return text ? `?${text}` : "";
}

async function errorDetail(response: Response): Promise<unknown> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    return body.detail ?? body;
  } catch {
    return response.statusText;
  }
}

export class Client {
  constructor(
    readonly base: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  private async requestJson(path: string, init?: RequestInit): Promise<unknown> {
    return (await this.request(path, init)).json();
  }

  async createSession(
    source: string,
    dialect: "java" | "cpp",
    breakpoints: number[],
  ): Promise<SessionView> {
    const data = await this.requestJson("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ source, dialect, breakpoints }),
    });
    return parseSessionView(data);
  }

  async info(sessionId: string): Promise<SessionInfo> {
    const data = await this.requestJson(`/sessions/${sessionId}`);
    return sessionInfoSchema.parse(data);
  }

  async command(sessionId: string, action: Action, arg?: number): Promise<SessionView> {
    const data = await this.requestJson(`/sessions/${sessionId}/command`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(arg === undefined ? { action } : { action, arg }),
    });
    return parseSessionView(data);
  }

  async view(sessionId: string, query: ViewQuery = {}): Promise<SessionView> {
    const data = await this.requestJson(`/sessions/${sessionId}/view${viewQueryString(query)}`);
    return parseSessionView(data);
  }

  async snapshotText(sessionId: string, step: number): Promise<string> {
    return (await this.request(`/sessions/${sessionId}/snapshot/${step}`)).text();
  }

  /**
   * Subscribe to the push channel. Every applied command is delivered to
   * `onStep`; malformed pushes go to `onError` and never reach `onStep`.
   * Returns an unsubscribe function. Requires a runtime with EventSource.
   */
  events(
    sessionId: string,
    onStep: (payload: SessionView) => void,
    onError?: (error: unknown) => void,
  ): () => void {
    const source = new EventSource(`${this.base}/sessions/${sessionId}/events`);
    source.addEventListener("step", (event: MessageEvent) => {
      try {
        onStep(parseSessionView(JSON.parse(event.data)));
      } catch (error) {
        onError?.(error);
      }
    });
    if (onError) source.addEventListener("error", (event) => onError(event));
    return () => source.close();
  }
}
