"""Execution-state tracing for two small teaching dialects.

Runs a program one statement at a time, persists a full stack/heap snapshot
per step, and serves forward/backward navigation over the recorded trace.
"""

from .model import (
    Char,
    HeapObject,
    Ref,
    Snapshot,
    SnapshotError,
    SnapshotParseError,
    SnapshotValidationError,
    StackFrame,
    ThreadState,
    VariableRecord,
    parse_snapshot,
    serialize_snapshot,
    snapshots_equal,
    validate_snapshot,
)
from .analysis import (
    LayoutPrefs,
    SnapshotDiff,
    annotate_heap_names,
    diff_snapshots,
    layout,
    reachable_heap,
    simplify_type_name,
)
from .microvm import DebugSession, Diagnostic, parse_program
from .tracestore import BoundaryError, Cursor, Trace, TraceError

__version__ = "0.1.0"

__all__ = [
    "BoundaryError",
    "Char",
    "Cursor",
    "DebugSession",
    "Diagnostic",
    "HeapObject",
    "LayoutPrefs",
    "Ref",
    "Snapshot",
    "SnapshotDiff",
    "SnapshotError",
    "SnapshotParseError",
    "SnapshotValidationError",
    "StackFrame",
    "ThreadState",
    "Trace",
    "TraceError",
    "VariableRecord",
    "annotate_heap_names",
    "diff_snapshots",
    "layout",
    "parse_program",
    "parse_snapshot",
    "reachable_heap",
    "serialize_snapshot",
    "simplify_type_name",
    "snapshots_equal",
    "validate_snapshot",
    "__version__",
]
