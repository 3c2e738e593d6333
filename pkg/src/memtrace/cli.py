"""Command line front end: run a program under the debugger, serve HTTP, replay, export.

`run` and `replay` share one small REPL; `run` drives a live in-process
session while `replay` only navigates a previously recorded trace directory.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import LayoutPrefs
from .server import create_app, default_trace_root
from .session import (
    SessionCreateError,
    SessionManager,
    SessionStateError,
    view_envelope,
)
from .tracestore import BoundaryError, Cursor, Trace, TraceError

_EXT_DIALECTS = {".java": "java", ".cpp": "cpp", ".cc": "cpp", ".cxx": "cpp", ".c": "cpp"}

HELP_TEXT = """commands:
  si            step into
  so            step over
  sr            step return (run until the current function pops)
  run           run to the next breakpoint (or to the end)
  back          go to the previous step
  fwd           go to the next step
  jump N        go to step N
  print         show the current view again
  list          show the source with the current line marked
  skip on|off   skip implicit steps when moving with back/fwd
  filter on|off show only stack-reachable heap objects
  mini on|off   collapse every frame except the top one
  help          this text
  quit          leave the debugger
"""


# ---------------------------------------------------------------------------
# view rendering


def _mark_suffix(mark) -> str:
    return f"  [{mark}]" if mark else ""


def _variable_line(row: dict) -> str:
    parts = [row["kind"], row["name"], row["type"], row["value"]]
    if row.get("address"):
        parts.append(row["address"])
    return " | ".join(parts) + _mark_suffix(row.get("mark"))


def _object_line(row: dict) -> str:
    fields = ", ".join(
        f"{f['name']}={f['value']}" + _mark_suffix(f.get("mark")) for f in row["fields"]
    )
    name = row["name"] if row["name"] else "-"
    parts = [name, row["id"], row["type"], fields]
    return " | ".join(parts) + _mark_suffix(row.get("mark"))


def render_view(payload: dict) -> str:
    """Plain-text rendering of a view payload; one row per variable or object."""
    view = payload["view"]
    lines = [
        f"step {payload['step']}/{payload['latestStep']} ({payload['status']}) line {view['line']}"
    ]
    if view.get("error"):
        lines.append(f"error: {view['error']}")
    for section in view["sections"]:
        lines.append(f"== {section['kind']} ==")
        if section["collapsed"]:
            lines.append("(collapsed)")
            continue
        if section["kind"] == "stack":
            for frame in section["frames"]:
                header = f"#{frame['frameIndex']} {frame['function']} line {frame['line']}"
                if frame["collapsed"]:
                    lines.append(f"{header} (collapsed, {len(frame['variables'])} variables)")
                    continue
                lines.append(header)
                for row in frame["variables"]:
                    lines.append("  " + _variable_line(row))
        elif section["kind"] == "heap":
            if not section["objects"]:
                lines.append("(empty)")
            for row in section["objects"]:
                lines.append(_object_line(row))
        else:  # globals
            for row in section["variables"]:
                lines.append(_variable_line(row))
    return "\n".join(lines)


def render_source(source: str, current_line: int) -> str:
    out = []
    for i, text in enumerate(source.splitlines(), start=1):
        marker = ">" if i == current_line else " "
        out.append(f"{marker} {i:4d}  {text}")
    return "\n".join(out)


def _parse_toggle(word: str):
    if word == "on":
        return True
    if word == "off":
        return False
    return None


# ---------------------------------------------------------------------------
# REPL


class _LiveTarget:
    """REPL backend for `run`: a session inside a local SessionManager."""

    def __init__(self, manager: SessionManager, session_id: str):
        self.manager = manager
        self.session_id = session_id

    actions = {
        "si": "stepInto",
        "so": "stepOver",
        "sr": "stepReturn",
        "run": "run",
        "back": "backStep",
        "fwd": "forwardStep",
        "jump": "jump",
    }

    def apply(self, word: str, arg) -> dict:
        return self.manager.command(self.session_id, self.actions[word], arg)

    def current(self) -> dict:
        return self.manager.view(self.session_id)

    @property
    def session(self):
        return self.manager.get(self.session_id)

    @property
    def source(self):
        return self.session.source

    def set_prefs(self, prefs: LayoutPrefs):
        self.session.prefs = prefs

    def get_prefs(self) -> LayoutPrefs:
        return self.session.prefs

    def set_skip(self, skip: bool):
        self.session.cursor.skip_implicit = skip


class _ReplayTarget:
    """REPL backend for `replay`: navigation over a recorded trace only."""

    def __init__(self, trace: Trace):
        self.trace = trace
        self.cursor = Cursor(trace, skip_implicit=True)
        self.prefs = LayoutPrefs()
        self.source = None

    actions = {"back": "back", "fwd": "fwd", "jump": "jump"}

    def apply(self, word: str, arg) -> dict:
        if word == "back":
            self.cursor.back()
        elif word == "fwd":
            self.cursor.forward()
        elif word == "jump":
            if arg is None:
                raise SessionStateError("jump requires a step argument")
            self.cursor.jump(arg)
        return self.current()

    def current(self) -> dict:
        envelope = view_envelope(self.trace, self.cursor.position, self.prefs)
        return {
            "sessionId": self.trace.session_id,
            "status": "replay",
            "latestStep": self.trace.count - 1,
            **envelope,
        }

    def set_prefs(self, prefs: LayoutPrefs):
        self.prefs = prefs

    def get_prefs(self) -> LayoutPrefs:
        return self.prefs

    def set_skip(self, skip: bool):
        self.cursor.skip_implicit = skip


def repl(target, out=None) -> int:
    out = out if out is not None else sys.stdout
    print(render_view(target.current()), file=out)
    print('type "help" for commands', file=out)
    while True:
        try:
            raw = input("(memtrace) ")
        except EOFError:
            print("", file=out)
            return 0
        words = raw.strip().split()
        if not words:
            continue
        word, rest = words[0], words[1:]
        if word in ("quit", "q", "exit"):
            return 0
        if word == "help":
            print(HELP_TEXT, file=out, end="")
            continue
        if word == "print":
            print(render_view(target.current()), file=out)
            continue
        if word == "list":
            if target.source is None:
                print("error: no source available for a replayed trace", file=out)
                continue
            print(render_source(target.source, target.current()["view"]["line"]), file=out)
            continue
        if word in ("skip", "filter", "mini"):
            value = _parse_toggle(rest[0]) if rest else None
            if value is None:
                print(f"usage: {word} on|off", file=out)
                continue
            if word == "skip":
                target.set_skip(value)
            else:
                prefs = target.get_prefs()
                target.set_prefs(
                    LayoutPrefs(
                        filter_heap=value if word == "filter" else prefs.filter_heap,
                        auto_minimize=value if word == "mini" else prefs.auto_minimize,
                        collapsed_sections=prefs.collapsed_sections,
                        collapsed_frames=prefs.collapsed_frames,
                    )
                )
                print(render_view(target.current()), file=out)
                continue
            print("ok", file=out)
            continue
        if word in target.actions:
            arg = None
            if rest:
                try:
                    arg = int(rest[0])
                except ValueError:
                    print(f"error: not a step number: {rest[0]}", file=out)
                    continue
            try:
                payload = target.apply(word, arg)
            except (SessionStateError, BoundaryError) as exc:
                print(f"error: {exc}", file=out)
                continue
            print(render_view(payload), file=out)
            continue
        print(f'error: unknown command {word!r}; type "help"', file=out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    path = Path(args.file)
    if not path.is_file():
        print(f"error: no such file: {path}", file=sys.stderr)
        return 1
    dialect = args.dialect or _EXT_DIALECTS.get(path.suffix)
    if dialect is None:
        print("error: cannot infer dialect from file name; pass --dialect", file=sys.stderr)
        return 1
    manager = SessionManager(args.trace_dir)
    try:
        session = manager.create_session(
            path.read_text(encoding="utf-8"), dialect, args.breakpoints
        )
    except SessionCreateError as exc:
        for diag in exc.diagnostics:
            print(
                f"{path.name}:{diag['line']}:{diag['column']}: {diag['message']}",
                file=sys.stderr,
            )
        return 1
    print(f"session {session.id} ({dialect}), trace in {session.trace.directory}")
    return repl(_LiveTarget(manager, session.id))


def cmd_serve(args) -> int:
    import uvicorn

    app = create_app(trace_root=args.trace_dir, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_replay(args) -> int:
    try:
        trace = Trace.open(args.trace_dir)
    except TraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if trace.count == 0:
        print("error: trace is empty", file=sys.stderr)
        return 1
    print(f"replaying session {trace.session_id} ({trace.dialect}), {trace.count} steps")
    return repl(_ReplayTarget(trace))


def cmd_export(args) -> int:
    try:
        trace = Trace.open(args.trace_dir)
        text = trace.raw(args.step)
    except TraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memtrace",
        description="Step through a small java or cpp program and inspect every state.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="debug a source file interactively")
    p_run.add_argument("file")
    p_run.add_argument("--dialect", choices=["java", "cpp"])
    p_run.add_argument(
        "--break",
        dest="breakpoints",
        action="append",
        type=int,
        default=[],
        metavar="LINE",
        help="breakpoint line; repeatable",
    )
    p_run.add_argument("--trace-dir", default=default_trace_root(), type=Path)
    p_run.set_defaults(func=cmd_run)

    p_serve = sub.add_parser("serve", help="serve the HTTP API (and optionally the UI)")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--trace-dir", default=default_trace_root(), type=Path)
    p_serve.add_argument("--static-dir", default=None)
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="navigate a recorded trace directory")
    p_replay.add_argument("trace_dir", metavar="trace-dir")
    p_replay.set_defaults(func=cmd_replay)

    p_export = sub.add_parser("export", help="print one stored snapshot verbatim")
    p_export.add_argument("trace_dir", metavar="trace-dir")
    p_export.add_argument("--step", type=int, required=True)
    p_export.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
