/**
 * DOM table rendering for the debugger view.
 *
 * Tables, not graphs: one stack table (newest frame on top), one heap table
 * (columns name / id / type / fields), and — in the cpp dialect — one
 * globals table. Created and changed entities carry two visually distinct
 * mark classes. Every cell's text comes straight from the payload.
 */
import {
  FrameRow,
  GlobalsSection,
  HeapSection,
  Mark,
  ObjectRow,
  StackSection,
  VariableRow,
  ViewModel,
} from "./types.js";
import {
  UiState,
  backEnabled,
  canSend,
  effectiveCollapsed,
  forwardEnabled,
  frameKey,
  liveSteppingEnabled,
} from "./state.js";

export interface UiCallbacks {
  command: (action: "run" | "stepInto" | "stepOver" | "stepReturn" | "backStep" | "forwardStep" | "jump", arg?: number) => void;
  togglePref: (pref: "filterHeap" | "autoMinimize", value: boolean) => void;
  toggleFrame: (key: string, serverCollapsed: boolean) => void;
}

const NO_CALLBACKS: UiCallbacks = {
  command: () => undefined,
  togglePref: () => undefined,
  toggleFrame: () => undefined,
};

function markClass(element: HTMLElement, mark: Mark): void {
  if (mark === "created") element.classList.add("mark-created");
  if (mark === "changed") element.classList.add("mark-changed");
}

function cell(doc: Document, text: string, className?: string): HTMLTableCellElement {
  const td = doc.createElement("td");
  td.textContent = text;
  if (className) td.className = className;
  return td;
}

function variableRow(
  doc: Document,
  row: VariableRow,
  path: string,
  withAddress: boolean,
): HTMLTableRowElement {
  const tr = doc.createElement("tr");
  tr.className = "var-row";
  tr.dataset.var = `${path}:${row.name}`;
  markClass(tr, row.mark);
  tr.append(
    cell(doc, row.kind, "kind"),
    cell(doc, row.name, "name"),
    cell(doc, row.type, "type"),
    cell(doc, row.value, "value"),
  );
  if (withAddress) tr.append(cell(doc, row.address ?? "", "address"));
  return tr;
}

function sectionShell(doc: Document, kind: string, title: string): HTMLElement {
  const section = doc.createElement("section");
  section.className = "panel";
  section.dataset.section = kind;
  const heading = doc.createElement("h2");
  heading.textContent = title;
  section.append(heading);
  return section;
}

/** Bottom-anchored frame path ("function#index from the stack bottom"). */
export function framePath(frames: readonly FrameRow[], frame: FrameRow): string {
  return `${frame.function}#${frames.length - 1 - frame.frameIndex}`;
}

export function renderStackSection(
  doc: Document,
  section: StackSection,
  state: UiState,
  callbacks: UiCallbacks,
  withAddress: boolean,
): HTMLElement {
  const shell = sectionShell(doc, "stack", "Stack");
  const table = doc.createElement("table");
  table.className = "stack-table";
  for (const frame of section.frames) {
    const body = doc.createElement("tbody");
    const key = frameKey(frame);
    body.dataset.frame = key;
    const collapsed = effectiveCollapsed(state, frame);
    body.classList.toggle("collapsed", collapsed);

    const header = doc.createElement("tr");
    header.className = "frame-header";
    const th = doc.createElement("th");
    th.colSpan = withAddress ? 5 : 4;
    const toggle = doc.createElement("button");
    toggle.type = "button";
    toggle.className = "frame-toggle";
    toggle.textContent = collapsed ? "+" : "−";
    toggle.addEventListener("click", () => callbacks.toggleFrame(key, frame.collapsed));
    th.append(toggle);
    const label = collapsed
      ? `#${frame.frameIndex} ${frame.function} line ${frame.line} (collapsed, ${frame.variables.length} variables)`
      : `#${frame.frameIndex} ${frame.function} line ${frame.line}`;
    th.append(doc.createTextNode(` ${label}`));
    header.append(th);
    body.append(header);

    if (!collapsed) {
      const path = framePath(section.frames, frame);
      for (const row of frame.variables) {
        body.append(variableRow(doc, row, path, withAddress));
      }
    }
    table.append(body);
  }
  shell.append(table);
  return shell;
}

function fieldSpans(doc: Document, object: ObjectRow): HTMLTableCellElement {
  const td = doc.createElement("td");
  td.className = "fields";
  object.fields.forEach((field, index) => {
    if (index > 0) td.append(doc.createTextNode(", "));
    const span = doc.createElement("span");
    span.className = "field";
    span.dataset.field = `${object.id}:${field.name}`;
    span.textContent = `${field.name}=${field.value}`;
    markClass(span, field.mark);
    if (field.address !== null) span.title = field.address;
    td.append(span);
  });
  return td;
}

export function renderHeapSection(doc: Document, section: HeapSection): HTMLElement {
  const shell = sectionShell(doc, "heap", "Heap");
  const table = doc.createElement("table");
  table.className = "heap-table";
  const head = doc.createElement("tr");
  head.className = "column-header";
  for (const title of ["name", "id", "type", "fields"]) {
    const th = doc.createElement("th");
    th.textContent = title;
    head.append(th);
  }
  table.append(head);
  if (section.objects.length === 0) {
    const tr = doc.createElement("tr");
    tr.className = "empty-row";
    const td = cell(doc, "(empty)");
    td.colSpan = 4;
    tr.append(td);
    table.append(tr);
  }
  for (const object of section.objects) {
    const tr = doc.createElement("tr");
    tr.className = "obj-row";
    tr.dataset.obj = object.id;
    markClass(tr, object.mark);
    tr.append(
      cell(doc, object.name || "-", "name"),
      cell(doc, object.id, "id"),
      cell(doc, object.type, "type"),
      fieldSpans(doc, object),
    );
    table.append(tr);
  }
  shell.append(table);
  return shell;
}

export function renderGlobalsSection(
  doc: Document,
  section: GlobalsSection,
  withAddress: boolean,
): HTMLElement {
  const shell = sectionShell(doc, "globals", "Globals");
  const table = doc.createElement("table");
  table.className = "globals-table";
  for (const row of section.variables) {
    table.append(variableRow(doc, row, "globals", withAddress));
  }
  if (section.variables.length === 0) {
    const tr = doc.createElement("tr");
    tr.className = "empty-row";
    tr.append(cell(doc, "(empty)"));
    table.append(tr);
  }
  shell.append(table);
  return shell;
}

/** Render the three table sections of a view model. */
export function renderSections(
  doc: Document,
  state: UiState,
  callbacks: UiCallbacks = NO_CALLBACKS,
): HTMLElement {
  const container = doc.createElement("div");
  container.className = "tables";
  const payload = state.payload;
  if (payload === null) return container;
  const vm = payload.view;
  const withAddress = vm.language === "cpp";
  for (const section of vm.sections) {
    if (section.kind === "stack") {
      container.append(renderStackSection(doc, section, state, callbacks, withAddress));
    } else if (section.kind === "heap") {
      container.append(renderHeapSection(doc, section));
    } else {
      container.append(renderGlobalsSection(doc, section, withAddress));
    }
  }
  return container;
}

export function renderControlBar(
  doc: Document,
  state: UiState,
  callbacks: UiCallbacks = NO_CALLBACKS,
): HTMLElement {
  const bar = doc.createElement("div");
  bar.className = "control-bar";
  const payload = state.payload;

  const liveOk = liveSteppingEnabled(state);
  const buttons: Array<["run" | "stepInto" | "stepOver" | "stepReturn" | "backStep" | "forwardStep", string, boolean]> = [
    ["run", "run", liveOk],
    ["stepInto", "step into", liveOk],
    ["stepOver", "step over", liveOk],
    ["stepReturn", "step return", liveOk],
    ["backStep", "back", backEnabled(state)],
    ["forwardStep", "forward", forwardEnabled(state)],
  ];
  for (const [action, label, enabled] of buttons) {
    const button = doc.createElement("button");
    button.type = "button";
    button.dataset.action = action;
    button.textContent = label;
    button.disabled = !enabled;
    button.addEventListener("click", () => callbacks.command(action));
    bar.append(button);
  }

  const jumpInput = doc.createElement("input");
  jumpInput.type = "number";
  jumpInput.min = "0";
  jumpInput.dataset.role = "jump-step";
  const jumpButton = doc.createElement("button");
  jumpButton.type = "button";
  jumpButton.dataset.action = "jump";
  jumpButton.textContent = "jump";
  jumpButton.disabled = !canSend(state) || payload === null;
  jumpButton.addEventListener("click", () => {
    const step = Number.parseInt(jumpInput.value, 10);
    if (!Number.isNaN(step)) callbacks.command("jump", step);
  });
  bar.append(jumpInput, jumpButton);

  for (const pref of ["filterHeap", "autoMinimize"] as const) {
    const label = doc.createElement("label");
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.dataset.pref = pref;
    box.checked = state[pref];
    box.addEventListener("change", () => callbacks.togglePref(pref, box.checked));
    label.append(box, doc.createTextNode(pref === "filterHeap" ? " reachable only" : " minimize frames"));
    bar.append(label);
  }

  const status = doc.createElement("span");
  status.dataset.role = "status";
  status.textContent = payload
    ? `step ${payload.step}/${payload.latestStep} (${payload.status}) line ${payload.view.line}`
    : "no session";
  bar.append(status);

  const connection = doc.createElement("span");
  connection.dataset.role = "connection";
  connection.textContent = state.connection;
  bar.append(connection);
  return bar;
}

/** Read-only source listing with the current line marked. */
export function renderSource(doc: Document, source: string, currentLine: number): HTMLElement {
  const pre = doc.createElement("pre");
  pre.className = "source";
  const lines = source.replace(/\n$/, "").split("\n");
  lines.forEach((text, index) => {
    const line = index + 1;
    const span = doc.createElement("span");
    span.className = line === currentLine ? "source-line current" : "source-line";
    span.dataset.line = String(line);
    span.textContent = `${line === currentLine ? ">" : " "} ${String(line).padStart(4)}  ${text}\n`;
    pre.append(span);
  });
  return pre;
}

/** Whole-view render: notice banner, control bar, error strip, tables. */
export function renderApp(
  doc: Document,
  state: UiState,
  callbacks: UiCallbacks = NO_CALLBACKS,
): HTMLElement {
  const app = doc.createElement("div");
  app.className = "app";
  if (state.notice !== null) {
    const banner = doc.createElement("div");
    banner.className = "banner";
    banner.dataset.role = "notice";
    banner.textContent = state.notice;
    app.append(banner);
  }
  app.append(renderControlBar(doc, state, callbacks));
  const vm = state.payload?.view;
  if (vm && vm.error !== null) {
    const strip = doc.createElement("div");
    strip.className = "error-strip";
    strip.dataset.role = "error";
    strip.textContent = `error: line ${vm.line}: ${vm.error}`;
    app.append(strip);
  }
  app.append(renderSections(doc, state, callbacks));
  return app;
}

/**
 * The set of marked entities in a view model, in the same key spelling as
 * diff entries — used to check that highlights mirror the last diff.
 */
export function markedEntryKeys(vm: ViewModel): Set<string> {
  const keys = new Set<string>();
  const markTag = (mark: Mark): string => (mark === "created" ? "+" : "~");
  for (const section of vm.sections) {
    if (section.kind === "stack") {
      for (const frame of section.frames) {
        const path = framePath(section.frames, frame);
        for (const row of frame.variables) {
          if (row.mark !== null) keys.add(`var${markTag(row.mark)}:${path}:${row.name}`);
        }
      }
    } else if (section.kind === "globals") {
      for (const row of section.variables) {
        if (row.mark !== null) keys.add(`var${markTag(row.mark)}:globals:${row.name}`);
      }
    } else {
      for (const object of section.objects) {
        if (object.mark !== null) keys.add(`obj${markTag(object.mark)}:${object.id}`);
        for (const field of object.fields) {
          if (field.mark !== null) keys.add(`field${markTag(field.mark)}:${object.id}:${field.name}`);
        }
      }
    }
  }
  return keys;
}
