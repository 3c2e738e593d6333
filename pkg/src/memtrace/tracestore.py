"""Disk layout for execution traces: one JSON file per snapshot plus metadata.

File names are `<sessionId>-<stepIndex>-<timestampMs>.snapshot.json` with the
step index zero-padded to six digits, so lexicographic order is step order.
Writes go through a temp file and an atomic rename; a reader never observes a
partially written snapshot.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .model import Snapshot, parse_snapshot, serialize_snapshot

SNAPSHOT_SUFFIX = ".snapshot.json"
META_NAME = "trace.meta.json"
STEP_WIDTH = 6


class TraceError(Exception):
    pass


class BoundaryError(TraceError):
    """Navigation past either end of a trace."""


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def snapshot_filename(session_id: str, step_index: int, timestamp_ms: int) -> str:
    return f"{session_id}-{step_index:0{STEP_WIDTH}d}-{timestamp_ms}{SNAPSHOT_SUFFIX}"


def _parse_filename(name: str):
    """Returns (session_id, step_index, timestamp_ms) or None if not a snapshot."""
    if not name.endswith(SNAPSHOT_SUFFIX):
        return None
    stem = name[: -len(SNAPSHOT_SUFFIX)]
    parts = stem.rsplit("-", 2)
    if len(parts) != 3:
        return None
    session_id, step_text, ts_text = parts
    if not (step_text.isdigit() and ts_text.isdigit()):
        return None
    return session_id, int(step_text), int(ts_text)


class Trace:
    """An append-only sequence of snapshots stored in one directory."""

    def __init__(self, directory: Path, session_id: str, dialect: str, source_file, implicit_steps, files):
        self.directory = Path(directory)
        self.session_id = session_id
        self.dialect = dialect
        self.source_file = source_file
        self._implicit = set(implicit_steps)
        self._files = files  # list[Path], index == step

    # -- construction ---------------------------------------------------------

    @classmethod
    def create(cls, directory, session_id: str, dialect: str, source_file=None) -> "Trace":
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta_path = directory / META_NAME
        if meta_path.exists() or any(directory.glob("*" + SNAPSHOT_SUFFIX)):
            raise TraceError(f"directory {directory} already holds a trace")
        trace = cls(directory, session_id, dialect, source_file, [], [])
        trace._write_meta()
        return trace

    @classmethod
    def open(cls, directory) -> "Trace":
        directory = Path(directory)
        meta_path = directory / META_NAME
        if not meta_path.is_file():
            raise TraceError(f"no {META_NAME} in {directory}")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise TraceError(f"{META_NAME}: {exc}") from exc
        for key in ("sessionId", "dialect"):
            if key not in meta:
                raise TraceError(f"{META_NAME} is missing {key!r}")
        entries = []
        for path in directory.iterdir():
            parsed = _parse_filename(path.name)
            if parsed is None:
                continue
            session_id, step, _ = parsed
            if session_id != meta["sessionId"]:
                raise TraceError(f"{path.name} does not belong to session {meta['sessionId']}")
            entries.append((step, path))
        entries.sort()
        files = []
        for expected, (step, path) in enumerate(entries):
            if step != expected:
                if step < expected or any(s == step for s, _ in entries[:expected]):
                    raise TraceError(f"duplicate step {step}")
                raise TraceError(f"missing snapshot for step {expected}")
            files.append(path)
        return cls(
            directory,
            meta["sessionId"],
            meta["dialect"],
            meta.get("sourceFile"),
            meta.get("implicitSteps", []),
            files,
        )

    def _write_meta(self):
        doc = {
            "sessionId": self.session_id,
            "dialect": self.dialect,
            "sourceFile": self.source_file,
            "implicitSteps": sorted(self._implicit),
        }
        _atomic_write(self.directory / META_NAME, json.dumps(doc, indent=2) + "\n")

    # -- appending ---------------------------------------------------------------

    @property
    def count(self) -> int:
        return len(self._files)

    def append(self, snapshot: Snapshot, implicit: bool = False):
        if snapshot.step_index != self.count:
            raise TraceError(
                f"snapshot stepIndex {snapshot.step_index} does not extend trace of {self.count}"
            )
        text = serialize_snapshot(snapshot)
        name = snapshot_filename(self.session_id, snapshot.step_index, snapshot.timestamp_ms)
        path = self.directory / name
        _atomic_write(path, text + "\n")
        self._files.append(path)
        if implicit:
            self._implicit.add(snapshot.step_index)
            self._write_meta()

    # -- reading -------------------------------------------------------------------

    def _check_step(self, step: int):
        if not isinstance(step, int) or step < 0 or step >= self.count:
            raise BoundaryError(f"step {step} out of range for trace of {self.count}")

    def path_for(self, step: int) -> Path:
        self._check_step(step)
        return self._files[step]

    def raw(self, step: int) -> str:
        """Stored file text, byte for byte."""
        return self.path_for(step).read_text(encoding="utf-8")

    def get(self, step: int) -> Snapshot:
        path = self.path_for(step)
        try:
            return parse_snapshot(path.read_text(encoding="utf-8"))
        except Exception as exc:
            raise TraceError(f"{path.name}: {exc}") from exc

    def is_implicit(self, step: int) -> bool:
        self._check_step(step)
        return step in self._implicit

    @property
    def implicit_steps(self) -> list:
        return sorted(self._implicit)

    def visible_steps(self) -> list:
        return [i for i in range(self.count) if i not in self._implicit]

    def snapshots(self):
        for step in range(self.count):
            yield self.get(step)


class Cursor:
    """A movable position inside a trace; optionally skips implicit steps."""

    def __init__(self, trace: Trace, skip_implicit: bool = False, position: int = 0):
        if trace.count == 0:
            raise BoundaryError("trace is empty")
        trace._check_step(position)
        self.trace = trace
        self.skip_implicit = skip_implicit
        self.position = position

    def current(self) -> Snapshot:
        return self.trace.get(self.position)

    def _visible(self, step: int) -> bool:
        return not (self.skip_implicit and self.trace.is_implicit(step))

    def forward(self) -> Snapshot:
        step = self.position + 1
        while step < self.trace.count and not self._visible(step):
            step += 1
        if step >= self.trace.count:
            raise BoundaryError("already at the last step")
        self.position = step
        return self.current()

    def back(self) -> Snapshot:
        step = self.position - 1
        while step >= 0 and not self._visible(step):
            step -= 1
        if step < 0:
            raise BoundaryError("already at the first step")
        self.position = step
        return self.current()

    def jump(self, step: int) -> Snapshot:
        # jumps are exact; the implicit filter only shapes relative moves
        self.trace._check_step(step)
        self.position = step
        return self.current()
