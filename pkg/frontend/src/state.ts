/**
 * Single state reducer for the client.
 *
 * Push-channel payloads and command responses funnel through the same
 * events, and at most one command is in flight at a time (`busy`). The
 * reducer is pure: all I/O lives in the bootstrap layer.
 */
import { FrameRow, SessionView } from "./types.js";

export type Connection = "idle" | "connecting" | "live" | "lost";

export interface UiState {
  sessionId: string | null;
  /** Last good payload; malformed or failed responses never replace it. */
  payload: SessionView | null;
  connection: Connection;
  filterHeap: boolean;
  autoMinimize: boolean;
  /** Per-frame expansion overrides keyed by "function#frameIndex". */
  expanded: Record<string, boolean>;
  /** True while a command or view refresh is in flight. */
  busy: boolean;
  /** Inline notice (server error, boundary, malformed payload). */
  notice: string | null;
}

export type UiEvent =
  | { kind: "sessionStarted"; payload: SessionView }
  | { kind: "commandSent" }
  | { kind: "payloadArrived"; payload: SessionView }
  | { kind: "commandFailed"; message: string }
  | { kind: "malformedPayload"; message: string }
  | { kind: "prefToggled"; pref: "filterHeap" | "autoMinimize"; value: boolean }
  | { kind: "frameToggled"; frameKey: string; serverCollapsed: boolean }
  | { kind: "connectionChanged"; value: Connection }
  | { kind: "noticeCleared" };

export const initialState: UiState = {
  sessionId: null,
  payload: null,
  connection: "idle",
  filterHeap: true,
  autoMinimize: false,
  expanded: {},
  busy: false,
  notice: null,
};

export function frameKey(frame: FrameRow): string {
  return `${frame.function}#${frame.frameIndex}`;
}

/** Whether a frame renders collapsed once user overrides are applied. */
export function effectiveCollapsed(state: UiState, frame: FrameRow): boolean {
  const override = state.expanded[frameKey(frame)];
  return override === undefined ? frame.collapsed : !override;
}

export function reduce(state: UiState, event: UiEvent): UiState {
  switch (event.kind) {
    case "sessionStarted":
      return {
        ...initialState,
        sessionId: event.payload.sessionId,
        payload: event.payload,
        connection: state.connection,
        filterHeap: event.payload.view.prefs.filterHeap,
        autoMinimize: event.payload.view.prefs.autoMinimize,
      };
    case "commandSent":
      return { ...state, busy: true };
    case "payloadArrived": {
      const stepChanged = state.payload === null || state.payload.step !== event.payload.step;
      return {
        ...state,
        payload: event.payload,
        busy: false,
        notice: null,
        expanded: stepChanged ? {} : state.expanded,
      };
    }
    case "commandFailed":
      return { ...state, busy: false, notice: event.message };
    case "malformedPayload":
      return { ...state, busy: false, notice: `malformed payload: ${event.message}` };
    case "prefToggled":
      return { ...state, [event.pref]: event.value };
    case "frameToggled": {
      const current = state.expanded[event.frameKey];
      const expandedNow = current === undefined ? !event.serverCollapsed : current;
      return { ...state, expanded: { ...state.expanded, [event.frameKey]: !expandedNow } };
    }
    case "connectionChanged":
      return { ...state, connection: event.value };
    case "noticeCleared":
      return { ...state, notice: null };
  }
}

/** Gate shared by every server interaction: one in-flight request. */
export function canSend(state: UiState): boolean {
  return state.sessionId !== null && !state.busy;
}

/** Live stepping requires a paused program and a cursor at the latest step. */
export function liveSteppingEnabled(state: UiState): boolean {
  const p = state.payload;
  return canSend(state) && p !== null && p.status === "paused" && p.step === p.latestStep;
}

export function backEnabled(state: UiState): boolean {
  return canSend(state) && state.payload !== null && state.payload.step > 0;
}

export function forwardEnabled(state: UiState): boolean {
  const p = state.payload;
  return canSend(state) && p !== null && p.step < p.latestStep;
}
