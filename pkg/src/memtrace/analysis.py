"""Visualization semantics over snapshots.

Heap reachability filtering, change/creation highlighting between steps,
java.lang type-name simplification, heap "name" annotation, and the vertical
table layout with frame collapsing.  Everything here is a pure function over
immutable snapshots.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional

from .model import (
    CPP,
    JAVA,
    Char,
    HeapObject,
    Ref,
    Snapshot,
    StackFrame,
    Value,
    VariableRecord,
)

GLOBALS_FRAME_PATH = "globals"

JAVA_STRING = "java.lang.String"


class ContractViolationError(Exception):
    """A caller broke an operation precondition."""


@dataclass(frozen=True)
class SnapshotDiff:
    """Entities changed or created between two snapshots.

    Variables are keyed by (framePath, name) where framePath anchors the
    frame from the bottom of the stack ("main#0"), so pushing a new frame
    does not shift the keys of older frames.  Globals use the pseudo-path
    "globals".
    """

    changed_variables: frozenset[tuple[str, str]] = frozenset()
    created_variables: frozenset[tuple[str, str]] = frozenset()
    changed_objects: frozenset[tuple[str, str]] = frozenset()
    created_objects: frozenset[str] = frozenset()
    removed_frames: int = 0

    def is_empty(self) -> bool:
        return not (
            self.changed_variables
            or self.created_variables
            or self.changed_objects
            or self.created_objects
            or self.removed_frames
        )

    def to_document(self) -> dict:
        return {
            "changedVariables": [list(k) for k in sorted(self.changed_variables)],
            "createdVariables": [list(k) for k in sorted(self.created_variables)],
            "changedObjects": [list(k) for k in sorted(self.changed_objects)],
            "createdObjects": sorted(self.created_objects),
            "removedFrames": self.removed_frames,
        }


def empty_diff_document() -> dict:
    return SnapshotDiff().to_document()


def frame_path(frame: StackFrame, stack_depth: int) -> str:
    bottom_index = stack_depth - 1 - frame.frame_index
    return f"{frame.function_name}#{bottom_index}"


# ---------------------------------------------------------------------------
# reachability


def reachable_heap(snapshot: Snapshot) -> set[str]:
    """Heap object ids transitively reachable from any stack/global variable."""
    by_id = snapshot.heap_by_id()
    seen: set[str] = set()
    work: list[str] = []
    for record in snapshot.root_variables():
        if isinstance(record.value, Ref) and record.value.target in by_id:
            if record.value.target not in seen:
                seen.add(record.value.target)
                work.append(record.value.target)
    while work:
        obj = by_id[work.pop()]
        for rec in obj.fields:
            if isinstance(rec.value, Ref) and rec.value.target in by_id:
                if rec.value.target not in seen:
                    seen.add(rec.value.target)
                    work.append(rec.value.target)
    return seen


# ---------------------------------------------------------------------------
# diffing


def _frame_values(frame: StackFrame) -> dict[str, Value]:
    return {record.name: record.value for record in frame.variables()}


def diff_snapshots(prev: Snapshot, curr: Snapshot) -> SnapshotDiff:
    """Diff two snapshots of one trace, prev strictly before curr.

    Visible-step adjacency cannot be checked from the snapshots alone (the
    implicit flags live in the trace index), so the contract enforced here
    is strict step ordering; callers pass adjacent visible steps.
    """
    if curr.step_index <= prev.step_index:
        raise ContractViolationError(
            f"diff requires prev.stepIndex < curr.stepIndex "
            f"(got {prev.step_index} -> {curr.step_index})"
        )

    changed_vars: set[tuple[str, str]] = set()
    created_vars: set[tuple[str, str]] = set()

    prev_bottom_up = list(reversed(prev.frames()))
    curr_bottom_up = list(reversed(curr.frames()))

    common = 0
    while (
        common < len(prev_bottom_up)
        and common < len(curr_bottom_up)
        and prev_bottom_up[common].function_name == curr_bottom_up[common].function_name
    ):
        common += 1
    removed_frames = len(prev_bottom_up) - common

    for bottom_index, frame in enumerate(curr_bottom_up):
        path = f"{frame.function_name}#{bottom_index}"
        curr_values = _frame_values(frame)
        if bottom_index < common:
            prev_values = _frame_values(prev_bottom_up[bottom_index])
        else:
            prev_values = {}
        for name, value in curr_values.items():
            if name not in prev_values:
                created_vars.add((path, name))
            elif prev_values[name] != value:
                changed_vars.add((path, name))

    prev_globals = {r.name: r.value for r in (prev.global_static_variables or ())}
    for record in curr.global_static_variables or ():
        if record.name not in prev_globals:
            created_vars.add((GLOBALS_FRAME_PATH, record.name))
        elif prev_globals[record.name] != record.value:
            changed_vars.add((GLOBALS_FRAME_PATH, record.name))

    prev_heap = prev.heap_by_id()
    changed_objects: set[tuple[str, str]] = set()
    created_objects: set[str] = set()
    for obj in curr.heap:
        before = prev_heap.get(obj.id)
        if before is None:
            created_objects.add(obj.id)
            continue
        before_fields = {r.name: r.value for r in before.fields}
        for rec in obj.fields:
            if rec.name not in before_fields or before_fields[rec.name] != rec.value:
                changed_objects.add((obj.id, rec.name))

    return SnapshotDiff(
        changed_variables=frozenset(changed_vars),
        created_variables=frozenset(created_vars),
        changed_objects=frozenset(changed_objects),
        created_objects=frozenset(created_objects),
        removed_frames=removed_frames,
    )


# ---------------------------------------------------------------------------
# type names


def simplify_type_name(fully_qualified: str) -> str:
    """Strip a leading "java.lang." from a simple class name.

    The prefix is removed only when the remainder contains no further dots,
    which keeps the operation idempotent (stripping never exposes another
    strippable prefix) and leaves java.lang subpackages untouched.
    """
    prefix = "java.lang."
    if fully_qualified.startswith(prefix):
        rest = fully_qualified[len(prefix) :]
        if rest and "." not in rest:
            return rest
    return fully_qualified


# ---------------------------------------------------------------------------
# heap name annotation


def annotate_heap_names(snapshot: Snapshot) -> Snapshot:
    """Populate each heap object's referencedBy with stack/global names.

    Directly referenced objects list every referring variable name, sorted.
    Objects reachable only through other objects get one path name rooted at
    the first variable that reaches them (e.g. "obj.f"); unreachable objects
    get an empty list.
    """
    by_id = snapshot.heap_by_id()
    direct: dict[str, set[str]] = {obj.id: set() for obj in snapshot.heap}
    roots: list[tuple[str, str]] = []  # (root name, object id), discovery order
    for record in snapshot.root_variables():
        if isinstance(record.value, Ref) and record.value.target in by_id:
            direct[record.value.target].add(record.name)
            roots.append((record.name, record.value.target))

    # breadth-first over (object, path) to find one shortest path per object
    paths: dict[str, str] = {}
    queue: deque[tuple[str, str]] = deque()
    for name, target in roots:
        if target not in paths:
            paths[target] = name
            queue.append((target, name))
    while queue:
        obj_id, path = queue.popleft()
        for rec in by_id[obj_id].fields:
            if isinstance(rec.value, Ref) and rec.value.target in by_id:
                if rec.value.target not in paths:
                    paths[rec.value.target] = f"{path}.{rec.name}"
                    queue.append((rec.value.target, f"{path}.{rec.name}"))

    new_heap = []
    for obj in snapshot.heap:
        if direct[obj.id]:
            names: tuple[str, ...] = tuple(sorted(direct[obj.id]))
        elif obj.id in paths:
            names = (paths[obj.id],)
        else:
            names = ()
        new_heap.append(replace(obj, referenced_by=names))
    return replace(snapshot, heap=tuple(new_heap))


# ---------------------------------------------------------------------------
# display rendering


def _escape_char(ch: str) -> str:
    escapes = {"\0": "\\0", "\n": "\\n", "\t": "\\t", "\r": "\\r", "'": "\\'", "\\": "\\\\"}
    return escapes.get(ch, ch)


def display_value(value: Value, snapshot: Snapshot) -> str:
    """Human-readable value text used by view rows and tables.

    References show the target identity, except java String references,
    which show the string content the way debuggers do.  cpp plain strings
    are pointer text or the "uninit" marker, never character data, so they
    render bare; java plain strings are string content and render quoted.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Char):
        return f"'{_escape_char(value.ch)}'"
    if value is None:
        return "null"
    if isinstance(value, str):
        if snapshot.language == CPP:
            return value
        return json.dumps(value)
    if isinstance(value, Ref):
        target = snapshot.heap_by_id().get(value.target)
        if (
            snapshot.language == JAVA
            and target is not None
            and target.runtime_type == JAVA_STRING
        ):
            for rec in target.fields:
                if rec.name == "value" and isinstance(rec.value, str):
                    return json.dumps(rec.value)
        return value.target
    return repr(value)


def display_type(declared_type: str, dialect: str) -> str:
    return simplify_type_name(declared_type) if dialect == JAVA else declared_type


# ---------------------------------------------------------------------------
# layout


@dataclass(frozen=True)
class LayoutPrefs:
    filter_heap: bool = True
    auto_minimize: bool = False
    collapsed_sections: frozenset[str] = frozenset()
    collapsed_frames: Mapping[int, bool] = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "filterHeap": self.filter_heap,
            "autoMinimize": self.auto_minimize,
            "collapsedSections": sorted(self.collapsed_sections),
            "collapsedFrames": {
                str(k): self.collapsed_frames[k] for k in sorted(self.collapsed_frames)
            },
        }


def _variable_row(
    record: VariableRecord,
    snapshot: Snapshot,
    mark: Optional[str],
) -> dict:
    return {
        "name": record.name,
        "type": display_type(record.declared_type, snapshot.language),
        "value": display_value(record.value, snapshot),
        "kind": record.kind,
        "address": record.address,
        "mark": mark,
    }


def _variable_mark(diff: Optional[SnapshotDiff], path: str, name: str) -> Optional[str]:
    if diff is None:
        return None
    if (path, name) in diff.created_variables:
        return "created"
    if (path, name) in diff.changed_variables:
        return "changed"
    return None


def layout(
    snapshot: Snapshot,
    diff: Optional[SnapshotDiff],
    prefs: LayoutPrefs = LayoutPrefs(),
) -> dict:
    """Resolve a snapshot plus diff into the view document the UI renders.

    Stack frames and heap rows are ordered newest-first; autoMinimize
    collapses every frame but the top one unless the user overrode that
    frame explicitly; filterHeap keeps only stack-reachable objects.
    """
    frames = snapshot.frames()
    depth = len(frames)
    frame_docs = []
    for frame in frames:
        path = frame_path(frame, depth)
        if frame.frame_index in prefs.collapsed_frames:
            collapsed = prefs.collapsed_frames[frame.frame_index]
        else:
            collapsed = prefs.auto_minimize and frame.frame_index != 0
        frame_docs.append(
            {
                "function": frame.function_name,
                "frameIndex": frame.frame_index,
                "line": frame.line,
                "collapsed": collapsed,
                "variables": [
                    _variable_row(r, snapshot, _variable_mark(diff, path, r.name))
                    for r in frame.variables()
                ],
            }
        )

    visible_ids = reachable_heap(snapshot) if prefs.filter_heap else None
    heap_rows = []
    for obj in reversed(snapshot.heap):  # newest (latest allocated) first
        if visible_ids is not None and obj.id not in visible_ids:
            continue
        obj_mark = None
        if diff is not None and obj.id in diff.created_objects:
            obj_mark = "created"
        fields = []
        for rec in obj.fields:
            field_mark = None
            if diff is not None and (obj.id, rec.name) in diff.changed_objects:
                field_mark = "changed"
            fields.append(
                {
                    "name": rec.name,
                    "type": display_type(rec.declared_type, snapshot.language),
                    "value": display_value(rec.value, snapshot),
                    "address": rec.address,
                    "mark": field_mark,
                }
            )
        heap_rows.append(
            {
                "name": ", ".join(obj.referenced_by),
                "id": obj.id,
                "type": display_type(obj.runtime_type, snapshot.language),
                "fields": fields,
                "mark": obj_mark,
            }
        )

    sections: list[dict] = [
        {
            "kind": "stack",
            "collapsed": "stack" in prefs.collapsed_sections,
            "frames": frame_docs,
        },
        {
            "kind": "heap",
            "collapsed": "heap" in prefs.collapsed_sections,
            "objects": heap_rows,
        },
    ]
    if snapshot.language == CPP:
        global_rows = [
            _variable_row(r, snapshot, _variable_mark(diff, GLOBALS_FRAME_PATH, r.name))
            for r in snapshot.global_static_variables or ()
        ]
        sections.append(
            {
                "kind": "globals",
                "collapsed": "globals" in prefs.collapsed_sections,
                "variables": global_rows,
            }
        )

    return {
        "language": snapshot.language,
        "line": snapshot.line_number,
        "error": snapshot.error,
        "sections": sections,
        "highlights": diff.to_document() if diff is not None else empty_diff_document(),
        "prefs": prefs.to_document(),
    }


def serialize_view(view_document: dict) -> str:
    return json.dumps(view_document, indent=2)
