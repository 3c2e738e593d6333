"""Snapshot data model and its canonical JSON text format.

A snapshot is one complete program state at one execution step: the stack
(wrapped in threads for the java dialect), the heap, global/static variables
(cpp dialect only), and the source line about to execute.  Serialization is
deterministic: the same snapshot always produces byte-identical text apart
from the timestamp field.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, replace
from typing import Any, Optional, Union

JAVA = "java"
CPP = "cpp"
DIALECTS = (JAVA, CPP)

THREAD_STATUSES = ("running", "paused", "finished")
VARIABLE_KINDS = ("argument", "local", "global", "static", "field")

_ADDRESS_RE = re.compile(r"^0x[0-9a-f]{16}$")


class SnapshotError(Exception):
    """Base class for snapshot model errors."""


class SnapshotParseError(SnapshotError):
    """The document is not syntactically or structurally a snapshot."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class SnapshotValidationError(SnapshotError):
    """A structurally well-formed snapshot violates model invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Char:
    """A single character value, kept distinct from one-character strings."""

    ch: str


@dataclass(frozen=True)
class Ref:
    """A reference to a heap object by its identity."""

    target: str


# The null sentinel is plain None.
Value = Union[int, bool, str, Char, Ref, None]


@dataclass(frozen=True)
class VariableRecord:
    name: str
    declared_type: str
    value: Value
    kind: str
    address: Optional[str] = None


@dataclass(frozen=True)
class StackFrame:
    function_name: str
    frame_index: int  # 0 = newest (top) frame
    line: int
    arguments: tuple[VariableRecord, ...] = ()
    locals: tuple[VariableRecord, ...] = ()

    def variables(self) -> tuple[VariableRecord, ...]:
        return self.arguments + self.locals


@dataclass(frozen=True)
class ThreadState:
    name: str
    status: str
    stack: tuple[StackFrame, ...] = ()


@dataclass(frozen=True)
class HeapObject:
    id: str
    runtime_type: str
    fields: tuple[VariableRecord, ...] = ()
    referenced_by: tuple[str, ...] = ()


@dataclass(frozen=True)
class Snapshot:
    language: str
    step_index: int
    line_number: int
    timestamp_ms: int
    threads: Optional[tuple[ThreadState, ...]] = None
    stack: Optional[tuple[StackFrame, ...]] = None
    heap: tuple[HeapObject, ...] = ()
    global_static_variables: Optional[tuple[VariableRecord, ...]] = None
    error: Optional[str] = None

    def frames(self) -> tuple[StackFrame, ...]:
        """All stack frames, concatenated across threads in thread order."""
        if self.stack is not None:
            return self.stack
        if self.threads is None:
            return ()
        out: list[StackFrame] = []
        for thread in self.threads:
            out.extend(thread.stack)
        return tuple(out)

    def heap_by_id(self) -> dict[str, HeapObject]:
        return {obj.id: obj for obj in self.heap}

    def root_variables(self) -> tuple[VariableRecord, ...]:
        """Stack variables of every frame plus globals: reachability roots."""
        out: list[VariableRecord] = []
        for frame in self.frames():
            out.extend(frame.variables())
        if self.global_static_variables:
            out.extend(self.global_static_variables)
        return tuple(out)

    def with_timestamp(self, timestamp_ms: int) -> "Snapshot":
        return replace(self, timestamp_ms=timestamp_ms)


def now_ms() -> int:
    return int(time.time() * 1000)


# ---------------------------------------------------------------------------
# value encoding


def encode_value(value: Value) -> Any:
    # bool check must precede int: bool is a subclass of int
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return value
    if value is None:
        return None
    if isinstance(value, Char):
        return {"char": value.ch}
    if isinstance(value, Ref):
        return {"ref": value.target}
    raise SnapshotParseError(f"unencodable value of type {type(value).__name__}")


def decode_value(raw: Any, path: str) -> Value:
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, int):
        return raw
    if isinstance(raw, str):
        return raw
    if raw is None:
        return None
    if isinstance(raw, dict):
        if set(raw.keys()) == {"char"} and isinstance(raw["char"], str):
            return Char(raw["char"])
        if set(raw.keys()) == {"ref"} and isinstance(raw["ref"], str):
            return Ref(raw["ref"])
    raise SnapshotParseError(f"{path}: not a valid value: {raw!r}")


# ---------------------------------------------------------------------------
# serialization


def _variable_doc(record: VariableRecord) -> dict:
    doc: dict[str, Any] = {
        "name": record.name,
        "type": record.declared_type,
        "value": encode_value(record.value),
    }
    if record.address is not None:
        doc["address"] = record.address
    doc["kind"] = record.kind
    return doc


def _frame_doc(frame: StackFrame) -> dict:
    return {
        "function": frame.function_name,
        "line": frame.line,
        "arguments": [_variable_doc(v) for v in frame.arguments],
        "locals": [_variable_doc(v) for v in frame.locals],
    }


def _thread_doc(thread: ThreadState) -> dict:
    return {
        "name": thread.name,
        "status": thread.status,
        "stack": [_frame_doc(f) for f in thread.stack],
    }


def _heap_doc(obj: HeapObject) -> dict:
    return {
        "id": obj.id,
        "type": obj.runtime_type,
        "fields": [_variable_doc(v) for v in obj.fields],
        "referencedBy": list(obj.referenced_by),
    }


def to_document(snapshot: Snapshot) -> dict:
    """Ordered dict form of a snapshot, mirroring the serialized key order."""
    doc: dict[str, Any] = {"language": snapshot.language}
    if snapshot.language == JAVA:
        doc["threads"] = [_thread_doc(t) for t in (snapshot.threads or ())]
    else:
        doc["stack"] = [_frame_doc(f) for f in (snapshot.stack or ())]
        doc["globalStaticVariables"] = [
            _variable_doc(v) for v in (snapshot.global_static_variables or ())
        ]
    doc["heap"] = [_heap_doc(o) for o in snapshot.heap]
    doc["lineNumber"] = snapshot.line_number
    if snapshot.error is not None:
        doc["error"] = snapshot.error
    doc["stepIndex"] = snapshot.step_index
    doc["timestamp"] = snapshot.timestamp_ms
    return doc


def serialize_snapshot(snapshot: Snapshot) -> str:
    """Serialize a valid snapshot to its canonical JSON text."""
    violations = validate_snapshot(snapshot)
    if violations:
        raise SnapshotValidationError(violations)
    return json.dumps(to_document(snapshot), indent=2)


# ---------------------------------------------------------------------------
# parsing


def _expect_list(raw: Any, path: str) -> list:
    if not isinstance(raw, list):
        raise SnapshotParseError(f"{path}: expected a list")
    return raw


def _expect_str(raw: Any, path: str) -> str:
    if not isinstance(raw, str):
        raise SnapshotParseError(f"{path}: expected a string")
    return raw


def _expect_int(raw: Any, path: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise SnapshotParseError(f"{path}: expected an integer")
    return raw


def _decode_variable(raw: Any, path: str) -> VariableRecord:
    if not isinstance(raw, dict):
        raise SnapshotParseError(f"{path}: expected an object")
    allowed = {"name", "type", "value", "address", "kind"}
    unknown = set(raw.keys()) - allowed
    if unknown:
        raise SnapshotParseError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("name", "type", "kind"):
        if key not in raw:
            raise SnapshotParseError(f"{path}: missing key {key!r}")
    if "value" not in raw:
        raise SnapshotParseError(f"{path}: missing key 'value'")
    address = raw.get("address")
    if address is not None:
        address = _expect_str(address, f"{path}.address")
    return VariableRecord(
        name=_expect_str(raw["name"], f"{path}.name"),
        declared_type=_expect_str(raw["type"], f"{path}.type"),
        value=decode_value(raw["value"], f"{path}.value"),
        kind=_expect_str(raw["kind"], f"{path}.kind"),
        address=address,
    )


def _decode_frame(raw: Any, index: int, path: str) -> StackFrame:
    if not isinstance(raw, dict):
        raise SnapshotParseError(f"{path}: expected an object")
    unknown = set(raw.keys()) - {"function", "line", "arguments", "locals"}
    if unknown:
        raise SnapshotParseError(f"{path}: unknown keys {sorted(unknown)}")
    return StackFrame(
        function_name=_expect_str(raw.get("function"), f"{path}.function"),
        frame_index=index,
        line=_expect_int(raw.get("line"), f"{path}.line"),
        arguments=tuple(
            _decode_variable(v, f"{path}.arguments[{i}]")
            for i, v in enumerate(_expect_list(raw.get("arguments"), f"{path}.arguments"))
        ),
        locals=tuple(
            _decode_variable(v, f"{path}.locals[{i}]")
            for i, v in enumerate(_expect_list(raw.get("locals"), f"{path}.locals"))
        ),
    )


def _decode_thread(raw: Any, path: str) -> ThreadState:
    if not isinstance(raw, dict):
        raise SnapshotParseError(f"{path}: expected an object")
    unknown = set(raw.keys()) - {"name", "status", "stack"}
    if unknown:
        raise SnapshotParseError(f"{path}: unknown keys {sorted(unknown)}")
    return ThreadState(
        name=_expect_str(raw.get("name"), f"{path}.name"),
        status=_expect_str(raw.get("status"), f"{path}.status"),
        stack=tuple(
            _decode_frame(f, i, f"{path}.stack[{i}]")
            for i, f in enumerate(_expect_list(raw.get("stack"), f"{path}.stack"))
        ),
    )


def _decode_heap_object(raw: Any, path: str) -> HeapObject:
    if not isinstance(raw, dict):
        raise SnapshotParseError(f"{path}: expected an object")
    unknown = set(raw.keys()) - {"id", "type", "fields", "referencedBy"}
    if unknown:
        raise SnapshotParseError(f"{path}: unknown keys {sorted(unknown)}")
    return HeapObject(
        id=_expect_str(raw.get("id"), f"{path}.id"),
        runtime_type=_expect_str(raw.get("type"), f"{path}.type"),
        fields=tuple(
            _decode_variable(v, f"{path}.fields[{i}]")
            for i, v in enumerate(_expect_list(raw.get("fields"), f"{path}.fields"))
        ),
        referenced_by=tuple(
            _expect_str(n, f"{path}.referencedBy[{i}]")
            for i, n in enumerate(
                _expect_list(raw.get("referencedBy"), f"{path}.referencedBy")
            )
        ),
    )


_TOP_LEVEL_KEYS = {
    "language",
    "threads",
    "stack",
    "globalStaticVariables",
    "heap",
    "lineNumber",
    "error",
    "stepIndex",
    "timestamp",
}


def snapshot_from_document(doc: Any) -> Snapshot:
    """Decode a parsed JSON document; raises SnapshotParseError on bad shape.

    Mutually exclusive blocks are decoded even when both are present so that
    validation can report the violation instead of the decoder masking it.
    """
    if not isinstance(doc, dict):
        raise SnapshotParseError("top level: expected an object")
    unknown = set(doc.keys()) - _TOP_LEVEL_KEYS
    if unknown:
        raise SnapshotParseError(f"top level: unknown keys {sorted(unknown)}")
    for key in ("language", "heap", "lineNumber", "stepIndex", "timestamp"):
        if key not in doc:
            raise SnapshotParseError(f"top level: missing key {key!r}")
    threads = None
    if "threads" in doc:
        threads = tuple(
            _decode_thread(t, f"threads[{i}]")
            for i, t in enumerate(_expect_list(doc["threads"], "threads"))
        )
    stack = None
    if "stack" in doc:
        stack = tuple(
            _decode_frame(f, i, f"stack[{i}]")
            for i, f in enumerate(_expect_list(doc["stack"], "stack"))
        )
    global_vars = None
    if "globalStaticVariables" in doc:
        global_vars = tuple(
            _decode_variable(v, f"globalStaticVariables[{i}]")
            for i, v in enumerate(
                _expect_list(doc["globalStaticVariables"], "globalStaticVariables")
            )
        )
    error = doc.get("error")
    if error is not None:
        error = _expect_str(error, "error")
    return Snapshot(
        language=_expect_str(doc["language"], "language"),
        step_index=_expect_int(doc["stepIndex"], "stepIndex"),
        line_number=_expect_int(doc["lineNumber"], "lineNumber"),
        timestamp_ms=_expect_int(doc["timestamp"], "timestamp"),
        threads=threads,
        stack=stack,
        heap=tuple(
            _decode_heap_object(o, f"heap[{i}]")
            for i, o in enumerate(_expect_list(doc["heap"], "heap"))
        ),
        global_static_variables=global_vars,
        error=error,
    )


def parse_snapshot(text: str) -> Snapshot:
    """Parse and validate a snapshot document.

    Malformed JSON raises SnapshotParseError with the byte offset; a valid
    document that violates model invariants raises SnapshotValidationError
    listing every violation.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotParseError(f"malformed document: {exc.msg}", offset=exc.pos) from exc
    snapshot = snapshot_from_document(doc)
    violations = validate_snapshot(snapshot)
    if violations:
        raise SnapshotValidationError(violations)
    return snapshot


# ---------------------------------------------------------------------------
# validation


def _validate_value(value: Value, where: str, out: list[str]) -> None:
    if isinstance(value, Char):
        if len(value.ch) != 1:
            out.append(f"{where}: char value must be a single character")
    elif isinstance(value, Ref):
        if not value.target:
            out.append(f"{where}: reference target must be non-empty")
    elif not (value is None or isinstance(value, (bool, int, str))):
        out.append(f"{where}: unsupported value type {type(value).__name__}")


def _validate_variable(
    record: VariableRecord,
    where: str,
    dialect: str,
    expected_kinds: tuple[str, ...],
    out: list[str],
) -> None:
    if not record.name:
        out.append(f"{where}: variable name must be non-empty")
    if record.kind not in VARIABLE_KINDS:
        out.append(f"{where}: unknown kind {record.kind!r}")
    elif record.kind not in expected_kinds:
        out.append(
            f"{where}: kind {record.kind!r} not allowed here (expected one of {expected_kinds})"
        )
    _validate_value(record.value, f"{where}.value", out)
    if record.address is not None:
        if dialect == JAVA:
            out.append(f"{where}: address present in java dialect")
        elif not _ADDRESS_RE.match(record.address):
            out.append(f"{where}: address {record.address!r} is not 0x + 16 hex digits")
    elif dialect == CPP and record.kind != "field":
        out.append(f"{where}: address missing on cpp non-field record")


def _validate_frame(frame: StackFrame, where: str, dialect: str, out: list[str]) -> None:
    if frame.line < 1:
        out.append(f"{where}.line: must be >= 1")
    names: set[str] = set()
    for record in frame.variables():
        if record.name in names:
            out.append(f"{where}: duplicate variable name {record.name!r}")
        names.add(record.name)
    for i, record in enumerate(frame.arguments):
        _validate_variable(record, f"{where}.arguments[{i}]", dialect, ("argument",), out)
    for i, record in enumerate(frame.locals):
        _validate_variable(record, f"{where}.locals[{i}]", dialect, ("local",), out)


def _validate_stack(
    frames: tuple[StackFrame, ...], where: str, dialect: str, out: list[str]
) -> None:
    for position, frame in enumerate(frames):
        if frame.frame_index != position:
            out.append(
                f"{where}[{position}]: frameIndex {frame.frame_index} not consecutive from 0"
            )
        _validate_frame(frame, f"{where}[{position}]", dialect, out)


def validate_snapshot(snapshot: Snapshot) -> list[str]:
    """Check every model invariant; returns a violation list (empty = valid)."""
    out: list[str] = []
    dialect = snapshot.language
    if dialect not in DIALECTS:
        out.append(f"language: unknown dialect {dialect!r}")
        return out

    if snapshot.step_index < 0:
        out.append("stepIndex: must be >= 0")
    if snapshot.line_number < 1:
        out.append("lineNumber: must be >= 1")
    if snapshot.timestamp_ms < 0:
        out.append("timestamp: must be >= 0")

    if dialect == JAVA:
        if snapshot.threads is None:
            out.append('threads: required for dialect "java"')
        elif len(snapshot.threads) < 1:
            out.append("threads: java snapshot needs at least one thread")
        if snapshot.stack is not None:
            out.append('exclusive block violation: language "java" with top-level "stack"')
        if snapshot.global_static_variables is not None:
            out.append('globalStaticVariables: present in dialect "java"')
    else:
        if snapshot.stack is None:
            out.append('stack: required for dialect "cpp"')
        if snapshot.global_static_variables is None:
            out.append('globalStaticVariables: required for dialect "cpp"')
        if snapshot.threads is not None:
            out.append('exclusive block violation: language "cpp" with "threads"')

    for t, thread in enumerate(snapshot.threads or ()):
        where = f"threads[{t}]"
        if not thread.name:
            out.append(f"{where}.name: must be non-empty")
        if thread.status not in THREAD_STATUSES:
            out.append(f"{where}.status: unknown status {thread.status!r}")
        elif thread.status == "paused" and len(thread.stack) < 1:
            out.append(f"{where}: paused thread must have at least one frame")
        elif thread.status == "finished" and len(thread.stack) != 0:
            out.append(f"{where}: finished thread must have an empty stack")
        _validate_stack(thread.stack, f"{where}.stack", dialect, out)

    if snapshot.stack is not None:
        _validate_stack(snapshot.stack, "stack", dialect, out)

    for i, record in enumerate(snapshot.global_static_variables or ()):
        _validate_variable(
            record, f"globalStaticVariables[{i}]", dialect, ("global", "static"), out
        )

    heap_ids: set[str] = set()
    for i, obj in enumerate(snapshot.heap):
        where = f"heap[{i}]"
        if not obj.id:
            out.append(f"{where}.id: must be non-empty")
        if obj.id in heap_ids:
            out.append(f"{where}.id: duplicate heap id {obj.id!r}")
        heap_ids.add(obj.id)
        for j, rec in enumerate(obj.fields):
            _validate_variable(rec, f"{where}.fields[{j}]", dialect, ("field",), out)
        if list(obj.referenced_by) != sorted(set(obj.referenced_by)):
            out.append(f"{where}.referencedBy: must be sorted and duplicate-free")

    # every reference resolves to a heap object present in this snapshot
    def check_ref(value: Value) -> None:
        if isinstance(value, Ref) and value.target not in heap_ids:
            out.append(f"dangling reference: {value.target}")

    direct_refs: dict[str, set[str]] = {obj.id: set() for obj in snapshot.heap}
    for record in snapshot.root_variables():
        check_ref(record.value)
        if isinstance(record.value, Ref) and record.value.target in direct_refs:
            direct_refs[record.value.target].add(record.name)
    for obj in snapshot.heap:
        for rec in obj.fields:
            check_ref(rec.value)

    # referencedBy must cover every direct referrer from the stack/globals
    for obj in snapshot.heap:
        missing = direct_refs.get(obj.id, set()) - set(obj.referenced_by)
        if missing:
            out.append(
                f"heap object {obj.id}: referencedBy missing direct referrers {sorted(missing)}"
            )

    return out


def ensure_valid(snapshot: Snapshot) -> Snapshot:
    violations = validate_snapshot(snapshot)
    if violations:
        raise SnapshotValidationError(violations)
    return snapshot


def snapshots_equal(a: Snapshot, b: Snapshot, ignore_timestamp: bool = True) -> bool:
    if ignore_timestamp:
        a = a.with_timestamp(0)
        b = b.with_timestamp(0)
    return a == b
