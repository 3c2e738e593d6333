"""Debug sessions that tie a running program, its trace, and a view cursor together.

A session's cursor starts pinned to the latest step. Execution commands only
apply there; after navigating backwards, the caller must return to the latest
step before stepping again. Both live stepping and replay produce views
through the same view_envelope path, so a replay renders the identical
document a live client saw.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path
from typing import Optional

from .analysis import LayoutPrefs, diff_snapshots, empty_diff_document, layout
from .microvm import (
    BreakpointError,
    DebugSession,
    Diagnostic,
    SessionFinishedError,
    parse_program,
)
from .tracestore import BoundaryError, Cursor, Trace

EXEC_ACTIONS = ("run", "stepInto", "stepOver", "stepReturn")
NAV_ACTIONS = ("backStep", "forwardStep", "jump")
ACTIONS = EXEC_ACTIONS + NAV_ACTIONS


class SessionError(Exception):
    pass


class UnknownSessionError(SessionError):
    def __init__(self, session_id: str):
        super().__init__(f"unknown session: {session_id}")


class SessionStateError(SessionError):
    """A command that is valid in general but not in the session's current state."""


class SessionCreateError(SessionError):
    """Source rejected before execution started; carries positioned diagnostics."""

    def __init__(self, diagnostics: list):
        super().__init__(diagnostics[0]["message"] if diagnostics else "invalid program")
        self.diagnostics = diagnostics


def highlight_baseline(trace: Trace, step: int) -> Optional[int]:
    """The step a view of `step` is diffed against.

    Implicit steps diff against their immediate predecessor. Visible steps
    diff against the previous visible step, so the highlights cover everything
    the last command did, including the sub-steps it skipped through.
    """
    if step == 0:
        return None
    if trace.is_implicit(step):
        return step - 1
    prev = step - 1
    while prev > 0 and trace.is_implicit(prev):
        prev -= 1
    return prev


def view_envelope(trace: Trace, step: int, prefs: LayoutPrefs = LayoutPrefs()) -> dict:
    """Render one step of a trace: {"step", "view", "diff"}."""
    snapshot = trace.get(step)
    baseline = highlight_baseline(trace, step)
    diff = None
    if baseline is not None:
        diff = diff_snapshots(trace.get(baseline), snapshot)
    return {
        "step": step,
        "view": layout(snapshot, diff, prefs),
        "diff": diff.to_document() if diff is not None else empty_diff_document(),
    }


class ManagedSession:
    def __init__(self, session_id: str, source: str, dialect: str, breakpoints: list, trace: Trace):
        self.id = session_id
        self.source = source
        self.dialect = dialect
        self.breakpoints = sorted(set(breakpoints))
        self.trace = trace
        self.program = parse_program(source, dialect)
        self.debug = DebugSession(self.program, breakpoints=self.breakpoints, trace=trace)
        self.cursor = Cursor(trace, skip_implicit=True)
        self.cursor.jump(trace.count - 1)  # pinned to latest (step 0 initially)
        self.prefs = LayoutPrefs()
        self.lock = threading.Lock()

    @property
    def status(self) -> str:
        return self.debug.status  # "paused" | "finished" | "error"

    @property
    def at_latest(self) -> bool:
        return self.cursor.position == self.trace.count - 1

    def info(self) -> dict:
        return {
            "sessionId": self.id,
            "dialect": self.dialect,
            "status": self.status,
            "breakpoints": self.breakpoints,
            "step": self.cursor.position,
            "latestStep": self.trace.count - 1,
            "stepCount": self.trace.count,
            "implicitSteps": self.trace.implicit_steps,
            "error": self.debug.error,
            "source": self.source,
        }


class SessionManager:
    """Owns all live sessions and the directory their traces persist under."""

    def __init__(self, trace_root):
        self.trace_root = Path(trace_root)
        self._sessions: dict = {}
        self._lock = threading.Lock()

    def create_session(self, source: str, dialect: str, breakpoints=()) -> ManagedSession:
        session_id = uuid.uuid4().hex[:12]
        trace_dir = self.trace_root / session_id
        try:
            trace = Trace.create(trace_dir, session_id, dialect, source_file=None)
            session = ManagedSession(session_id, source, dialect, list(breakpoints), trace)
        except Diagnostic as exc:
            raise SessionCreateError([exc.to_document()]) from exc
        except BreakpointError as exc:
            raise SessionCreateError(
                [{"line": exc.line, "column": 1, "message": exc.message}]
            ) from exc
        with self._lock:
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> ManagedSession:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(session_id)
        return session

    def command(self, session_id: str, action: str, arg: Optional[int] = None) -> dict:
        """Apply one command and return the payload broadcast to every watcher."""
        session = self.get(session_id)
        if action not in ACTIONS:
            raise SessionStateError(f"unknown action: {action}")
        with session.lock:
            if action in EXEC_ACTIONS:
                if not session.at_latest:
                    raise SessionStateError("navigate to latest first")
                try:
                    if action == "run":
                        session.debug.run_to_breakpoint()
                    elif action == "stepInto":
                        session.debug.step_into()
                    elif action == "stepOver":
                        session.debug.step_over()
                    else:
                        session.debug.step_return()
                except SessionFinishedError as exc:
                    raise SessionStateError(str(exc)) from exc
                session.cursor.jump(session.trace.count - 1)
            elif action == "backStep":
                try:
                    session.cursor.back()
                except BoundaryError as exc:
                    raise SessionStateError(str(exc)) from exc
            elif action == "forwardStep":
                try:
                    session.cursor.forward()
                except BoundaryError as exc:
                    raise SessionStateError(str(exc)) from exc
            else:  # jump
                if arg is None:
                    raise SessionStateError("jump requires a step argument")
                try:
                    session.cursor.jump(arg)
                except BoundaryError as exc:
                    raise SessionStateError(str(exc)) from exc
            return self._payload(session)

    def view(
        self,
        session_id: str,
        step: Optional[int] = None,
        filter_heap: Optional[bool] = None,
        auto_minimize: Optional[bool] = None,
    ) -> dict:
        """Render a view without moving the session's cursor."""
        session = self.get(session_id)
        with session.lock:
            position = session.cursor.position if step is None else step
            prefs = session.prefs
            if filter_heap is not None or auto_minimize is not None:
                prefs = LayoutPrefs(
                    filter_heap=prefs.filter_heap if filter_heap is None else filter_heap,
                    auto_minimize=(
                        prefs.auto_minimize if auto_minimize is None else auto_minimize
                    ),
                    collapsed_sections=prefs.collapsed_sections,
                    collapsed_frames=prefs.collapsed_frames,
                )
            try:
                envelope = view_envelope(session.trace, position, prefs)
            except BoundaryError as exc:
                raise SessionStateError(str(exc)) from exc
            return {
                "sessionId": session.id,
                "status": session.status,
                "latestStep": session.trace.count - 1,
                **envelope,
            }

    def snapshot_text(self, session_id: str, step: int) -> str:
        """The stored snapshot file for one step, byte for byte."""
        session = self.get(session_id)
        with session.lock:
            try:
                return session.trace.raw(step)
            except BoundaryError as exc:
                raise SessionStateError(str(exc)) from exc

    def info(self, session_id: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            return session.info()

    def _payload(self, session: ManagedSession) -> dict:
        envelope = view_envelope(session.trace, session.cursor.position, session.prefs)
        return {
            "sessionId": session.id,
            "status": session.status,
            "latestStep": session.trace.count - 1,
            **envelope,
        }
