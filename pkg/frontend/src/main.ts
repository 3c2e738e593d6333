/**
 * Browser bootstrap: session creation form, the dispatch loop, and the push
 * channel subscription. All state transitions run through the reducer; this
 * module owns the I/O and repaints after every event.
 */
import { ApiError, Client } from "./api.js";
import { UiCallbacks, renderApp, renderSource } from "./render.js";
import { UiEvent, UiState, canSend, initialState, reduce } from "./state.js";
import { Action } from "./types.js";

const SAMPLE_SOURCE = `class Demo { int i; char c; }
void main() {
  int a = 5;
  Demo obj = new Demo();
  obj.i = a * 14;
  obj.c = 'Z';
  String s = "Hello";
  int b = obj.i;
}
`;

function noticeText(error: unknown): string {
  if (error instanceof ApiError) {
    const detail = error.detail as { diagnostics?: Array<{ line: number; column: number; message: string }> };
    if (detail && Array.isArray(detail.diagnostics)) {
      return detail.diagnostics.map((d) => `${d.line}:${d.column}: ${d.message}`).join("; ");
    }
    return error.message;
  }
  return error instanceof Error ? error.message : String(error);
}

export interface App {
  dispatch(event: UiEvent): void;
  getState(): UiState;
  start(source: string, dialect: "java" | "cpp", breakpoints: number[]): Promise<void>;
}

export function bootstrap(root: HTMLElement, client: Client = new Client()): App {
  const doc = root.ownerDocument;
  let state: UiState = initialState;
  let sourceText = "";
  let unsubscribe: (() => void) | null = null;

  const callbacks: UiCallbacks = {
    command: (action, arg) => {
      void sendCommand(action, arg);
    },
    togglePref: (pref, value) => {
      dispatch({ kind: "prefToggled", pref, value });
      void refreshView();
    },
    toggleFrame: (key, serverCollapsed) => {
      dispatch({ kind: "frameToggled", frameKey: key, serverCollapsed });
    },
  };

  const setup = doc.createElement("form");
  setup.className = "setup";
  const sourceBox = doc.createElement("textarea");
  sourceBox.rows = 12;
  sourceBox.value = SAMPLE_SOURCE;
  const dialectSelect = doc.createElement("select");
  for (const dialect of ["java", "cpp"]) {
    const option = doc.createElement("option");
    option.value = dialect;
    option.textContent = dialect;
    dialectSelect.append(option);
  }
  const breakpointsBox = doc.createElement("input");
  breakpointsBox.placeholder = "breakpoint lines, e.g. 10";
  breakpointsBox.value = "10";
  const startButton = doc.createElement("button");
  startButton.type = "submit";
  startButton.textContent = "start session";
  setup.append(sourceBox, dialectSelect, breakpointsBox, startButton);
  setup.addEventListener("submit", (event) => {
    event.preventDefault();
    const breakpoints = breakpointsBox.value
      .split(",")
      .map((piece) => Number.parseInt(piece.trim(), 10))
      .filter((line) => !Number.isNaN(line));
    void start(sourceBox.value, dialectSelect.value as "java" | "cpp", breakpoints);
  });

  const stage = doc.createElement("div");
  stage.className = "stage";
  root.append(setup, stage);

  function paint(): void {
    stage.replaceChildren();
    stage.append(renderApp(doc, state, callbacks));
    if (state.payload !== null && sourceText !== "") {
      stage.append(renderSource(doc, sourceText, state.payload.view.line));
    }
  }

  function dispatch(event: UiEvent): void {
    state = reduce(state, event);
    paint();
  }

  async function sendCommand(action: Action, arg?: number): Promise<void> {
    if (!canSend(state) || state.sessionId === null) return;
    const sessionId = state.sessionId;
    dispatch({ kind: "commandSent" });
    try {
      const payload = await client.command(sessionId, action, arg);
      dispatch({ kind: "payloadArrived", payload });
    } catch (error) {
      if (error instanceof ApiError) {
        dispatch({ kind: "commandFailed", message: noticeText(error) });
      } else {
        dispatch({ kind: "malformedPayload", message: noticeText(error) });
      }
    }
  }

  async function refreshView(): Promise<void> {
    if (!canSend(state) || state.sessionId === null) return;
    const sessionId = state.sessionId;
    dispatch({ kind: "commandSent" });
    try {
      const payload = await client.view(sessionId, {
        filterHeap: state.filterHeap,
        autoMinimize: state.autoMinimize,
      });
      dispatch({ kind: "payloadArrived", payload });
    } catch (error) {
      if (error instanceof ApiError) {
        dispatch({ kind: "commandFailed", message: noticeText(error) });
      } else {
        dispatch({ kind: "malformedPayload", message: noticeText(error) });
      }
    }
  }

  async function start(
    source: string,
    dialect: "java" | "cpp",
    breakpoints: number[],
  ): Promise<void> {
    try {
      const payload = await client.createSession(source, dialect, breakpoints);
      unsubscribe?.();
      dispatch({ kind: "sessionStarted", payload });
      const info = await client.info(payload.sessionId);
      sourceText = info.source;
      if (typeof EventSource !== "undefined") {
        dispatch({ kind: "connectionChanged", value: "connecting" });
        unsubscribe = client.events(
          payload.sessionId,
          (pushed) => {
            dispatch({ kind: "connectionChanged", value: "live" });
            dispatch({ kind: "payloadArrived", payload: pushed });
          },
          () => dispatch({ kind: "connectionChanged", value: "lost" }),
        );
      }
      paint();
    } catch (error) {
      dispatch({ kind: "commandFailed", message: noticeText(error) });
    }
  }

  paint();
  return { dispatch, getState: () => state, start };
}

declare const document: Document | undefined;

if (typeof document !== "undefined") {
  const root = document.getElementById("root");
  if (root !== null) bootstrap(root);
}
