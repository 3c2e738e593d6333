"""Interpreter pauses, stepping commands, state capture, runtime errors."""

import pytest

from memtrace.microvm import (
    BreakpointError,
    DebugSession,
    SessionFinishedError,
    parse_program,
)
from memtrace.microvm.vm import (
    FRAME_STRIDE,
    HEAP_BASE,
    GLOBAL_BASE,
    MemoryTrace,
    SLOT_SIZE,
    STACK_BASE,
)
from memtrace.model import Char, Ref

from .corpus import (
    DANGLING,
    DIV_ZERO,
    GLOBALS_CPP,
    LISTING1,
    NULL_FIELD,
    POINTERS,
    RECURSION,
    SINGLE_CALL,
    SWAP,
    UNINIT_READ,
    WHILE_LOOP,
    run_session,
)


def start(entry, breakpoints=None):
    program = parse_program(entry.source, entry.dialect)
    bps = entry.breakpoints if breakpoints is None else breakpoints
    return DebugSession(program, breakpoints=bps)


def frame_vars(snapshot, frame_index=0):
    frame = snapshot.frames()[frame_index]
    return {r.name: r.value for r in frame.variables()}


def visible_lines(session):
    trace = session.trace
    return [
        trace.get(i).line_number for i in range(trace.count) if not trace.is_implicit(i)
    ]


# -- pause sequencing -------------------------------------------------------------


def test_initial_snapshot_pauses_before_first_statement():
    session = start(LISTING1, breakpoints=())
    snap = session.trace.get(0)
    assert snap.line_number == 4
    assert snap.step_index == 0
    assert session.status == "paused"
    assert frame_vars(snap) == {"args": None}  # nothing declared yet


def test_step_into_walks_every_statement_then_exit():
    session = start(LISTING1, breakpoints=())
    lines = []
    while session.status == "paused":
        lines.append(session.step_into().line_number)
    assert lines == [5, 6, 7, 8, 9, 10, 10]
    assert session.status == "finished"


def test_finished_snapshot_has_empty_stack():
    session = run_session(LISTING1)
    last = session.trace.get(session.trace.count - 1)
    assert last.frames() == ()
    assert last.threads[0].status == "finished"


def test_while_loop_repauses_at_header():
    session = run_session(WHILE_LOOP)
    # header line 5 pauses before each test: 3 iterations plus the final check
    assert visible_lines(session).count(5) == 4


def test_exit_pause_at_function_close_brace():
    session = start(SINGLE_CALL)
    assert session.last_snapshot.line_number == 7  # before the call
    assert session.step_into().line_number == 3  # first statement of add
    session.step_into()  # return s
    snap = session.step_into()  # exit pause at add's closing brace
    assert snap.line_number == 5
    assert [f.function_name for f in snap.frames()] == ["add", "main"]


def test_step_counts_match_trace():
    session = run_session(LISTING1)
    assert session.trace.count == 8
    assert [session.trace.is_implicit(i) for i in range(8)] == [False] * 8


# -- stepping commands -------------------------------------------------------------


def test_step_over_skips_call_internals():
    session = start(SINGLE_CALL)
    snap = session.step_over()  # executes line 7 without entering add
    assert snap.line_number == 8
    assert len(snap.frames()) == 1
    assert frame_vars(snap)["a"] == 5
    # the skipped pauses were recorded as implicit steps
    flags = [session.trace.is_implicit(i) for i in range(session.trace.count)]
    assert flags == [False, True, True, True, False]


def test_step_over_equals_into_on_non_call_lines():
    session = start(LISTING1, breakpoints=())
    snap = session.step_over()
    assert snap.line_number == 5
    assert session.trace.count == 2
    assert not session.trace.is_implicit(1)


def test_step_return_runs_to_caller():
    session = start(SINGLE_CALL)
    session.step_into()  # into add
    session.step_into()  # at return s
    assert len(session.last_snapshot.frames()) == 2
    snap = session.step_return()
    assert len(snap.frames()) == 1
    assert snap.line_number == 8  # next statement of main
    assert frame_vars(snap)["a"] == 5


def test_step_return_from_main_finishes():
    session = start(LISTING1, breakpoints=())
    snap = session.step_return()
    assert session.status == "finished"
    assert snap.frames() == ()


def test_run_stops_at_breakpoint():
    session = start(LISTING1)  # breakpoint at line 10 (main's close brace)
    snap = session.run_to_breakpoint()
    assert snap.line_number == 10
    assert session.status == "paused"
    flags = [session.trace.is_implicit(i) for i in range(session.trace.count)]
    assert flags == [False, True, True, True, True, True, False]


def test_run_without_breakpoints_finishes():
    session = start(LISTING1, breakpoints=())
    session.run_to_breakpoint()
    assert session.status == "finished"


def test_run_always_makes_progress():
    program = parse_program(WHILE_LOOP.source, "java")
    session = DebugSession(program, breakpoints=(5,))
    first = session.run_to_breakpoint()
    second = session.run_to_breakpoint()
    assert first.line_number == 5
    assert second.line_number == 5
    assert second.step_index > first.step_index


def test_breakpoint_must_be_executable():
    program = parse_program(LISTING1.source, "java")
    with pytest.raises(BreakpointError) as exc_info:
        DebugSession(program, breakpoints=(1,))
    assert "line 1 is not an executable statement" in str(exc_info.value)


def test_stepping_after_finish_raises():
    session = run_session(LISTING1)
    with pytest.raises(SessionFinishedError):
        session.step_into()
    with pytest.raises(SessionFinishedError):
        session.run_to_breakpoint()


def test_commands_append_exactly_one_visible_snapshot():
    session = start(SINGLE_CALL)
    before = session.trace.count
    session.step_over()
    after = session.trace.count
    visible = [
        i for i in range(before, after) if not session.trace.is_implicit(i)
    ]
    assert len(visible) == 1
    assert visible[-1] == after - 1


# -- captured state: java ----------------------------------------------------------


def test_listing1_state_at_breakpoint():
    session = start(LISTING1)
    snap = session.run_to_breakpoint()
    values = frame_vars(snap)
    assert values["a"] == 5
    assert values["b"] == 70
    assert isinstance(values["obj"], Ref)
    assert isinstance(values["s"], Ref)

    by_id = snap.heap_by_id()
    demo = by_id[values["obj"].target]
    assert demo.runtime_type == "Demo"
    assert {r.name: r.value for r in demo.fields} == {"i": 70, "c": Char("Z")}
    string = by_id[values["s"].target]
    assert string.runtime_type == "java.lang.String"
    assert {r.name: r.value for r in string.fields} == {"value": "Hello"}


def test_heap_ids_follow_allocation_order():
    session = start(LISTING1)
    snap = session.run_to_breakpoint()
    assert [obj.id for obj in snap.heap] == ["obj-1", "obj-2"]


def test_java_new_zero_initializes_fields():
    session = start(LISTING1, breakpoints=(5,))
    snap = session.run_to_breakpoint()
    demo = snap.heap_by_id()["obj-1"]
    assert {r.name: r.value for r in demo.fields} == {"i": 0, "c": Char("\0")}


def test_argument_kind_recorded():
    session = start(SINGLE_CALL)
    snap = session.step_into()  # inside add
    top = snap.frames()[0]
    assert {r.name for r in top.arguments} == {"x", "y"}
    assert all(r.kind == "argument" for r in top.arguments)
    assert {r.name: r.value for r in top.arguments} == {"x": 2, "y": 3}


def test_referenced_by_annotated():
    session = start(LISTING1)
    snap = session.run_to_breakpoint()
    assert snap.heap_by_id()["obj-1"].referenced_by == ("obj",)
    assert snap.heap_by_id()["obj-2"].referenced_by == ("s",)


def test_java_snapshots_have_no_addresses():
    session = run_session(LISTING1)
    for snap in session.trace.snapshots:
        for frame in snap.frames():
            assert all(r.address is None for r in frame.variables())


# -- captured state: cpp ------------------------------------------------------------


def test_cpp_stack_addresses_descend_from_frame_base():
    session = start(POINTERS, breakpoints=())
    session.step_into()  # x declared
    snap = session.step_into()  # p declared
    (frame,) = snap.frames()
    addrs = {r.name: r.address for r in frame.variables()}
    base = STACK_BASE  # main sits at depth 0
    assert addrs["x"] == f"0x{base - SLOT_SIZE:016x}"
    assert addrs["p"] == f"0x{base - 2 * SLOT_SIZE:016x}"


def test_cpp_frame_stride_separates_calls():
    session = start(SWAP)
    session.step_into()
    session.step_into()
    snap = session.step_into()  # inside swap
    top = snap.frames()[0]
    assert top.function_name == "swap"
    a_addr = next(r.address for r in top.variables() if r.name == "a")
    expected = STACK_BASE - FRAME_STRIDE - SLOT_SIZE
    assert a_addr == f"0x{expected:016x}"


def test_address_of_yields_pointee_slot_address():
    session = start(POINTERS, breakpoints=())
    session.step_into()
    snap = session.step_into()  # after int* p = &x;
    values = frame_vars(snap)
    addrs = {r.name: r.address for r in snap.frames()[0].variables()}
    assert values["p"] == addrs["x"]  # pointer value is x's address text


def test_pointer_write_reaches_target():
    session = start(POINTERS, breakpoints=())
    for _ in range(3):
        session.step_into()  # past x, p, *p = 6
    assert frame_vars(session.last_snapshot)["x"] == 6


def test_swap_through_pointers():
    session = run_session(SWAP)
    final_vars = None
    for step in range(session.trace.count):
        snap = session.trace.get(step)
        if snap.frames():
            final_vars = frame_vars(snap, 0)
    assert final_vars["x"] == 2
    assert final_vars["y"] == 1
    assert final_vars["z"] == 21


def test_cpp_heap_identity_is_the_object_address():
    session = start(POINTERS, breakpoints=(8,))
    snap = session.run_to_breakpoint()
    assert [obj.id for obj in snap.heap] == [f"0x{HEAP_BASE:016x}"]


def test_cpp_new_leaves_fields_uninitialized():
    session = start(POINTERS, breakpoints=(8,))
    snap = session.run_to_breakpoint()
    node = snap.heap_by_id()[f"0x{HEAP_BASE:016x}"]
    assert {r.name: r.value for r in node.fields} == {"v": "uninit", "next": "uninit"}


def test_cpp_heap_field_addresses():
    session = start(POINTERS, breakpoints=(8,))
    snap = session.run_to_breakpoint()
    node = snap.heap_by_id()[f"0x{HEAP_BASE:016x}"]
    addrs = [r.address for r in node.fields]
    assert addrs == [f"0x{HEAP_BASE:016x}", f"0x{HEAP_BASE + SLOT_SIZE:016x}"]


def test_cpp_second_allocation_offset_by_aligned_size():
    source = (
        "struct P { int a; };\n"
        "void main() {\n"
        "  P* x = new P();\n"
        "  P* y = new P();\n"
        "}\n"
    )
    session = DebugSession(parse_program(source, "cpp"))
    session.step_into()
    snap = session.step_into()
    cells = {o.id: o for o in snap.heap}
    assert cells[f"0x{HEAP_BASE:016x}"].fields[0].address == f"0x{HEAP_BASE:016x}"
    # one-field struct still occupies one 16-byte chunk
    assert cells[f"0x{HEAP_BASE + 16:016x}"].fields[0].address == f"0x{HEAP_BASE + 16:016x}"


def test_cpp_globals_initialized_and_addressed():
    session = start(GLOBALS_CPP)
    snap = session.trace.get(0)
    globals_ = {r.name: r for r in snap.global_static_variables}
    assert globals_["counter"].value == 0
    assert globals_["limit"].value == 3
    assert globals_["counter"].address == f"0x{GLOBAL_BASE:016x}"
    assert globals_["limit"].address == f"0x{GLOBAL_BASE + SLOT_SIZE:016x}"


def test_cpp_global_updates_visible():
    session = run_session(GLOBALS_CPP)
    last = session.trace.get(session.trace.count - 1)
    counter = next(r for r in last.global_static_variables if r.name == "counter")
    assert counter.value == 3


def test_cpp_default_global_is_zeroed():
    source = "int g;\nvoid main() {\n  int x = g;\n}\n"
    session = DebugSession(parse_program(source, "cpp"))
    (g,) = session.trace.get(0).global_static_variables
    assert g.value == 0


# -- runtime errors ------------------------------------------------------------------


def check_error(entry, expected_line):
    session = run_session(entry)
    assert session.status == "error"
    assert entry.expect_error in session.error
    last = session.trace.get(session.trace.count - 1)
    assert last.error == session.error
    assert last.line_number == expected_line
    return session


def test_division_by_zero():
    session = check_error(DIV_ZERO, expected_line=5)
    assert session.error == "line 5: division by zero"


def test_modulo_by_zero():
    source = "void main() {\n  int a = 1 % 0;\n}\n"
    session = DebugSession(parse_program(source, "cpp"))
    session.step_into()
    assert session.status == "error"
    assert session.error == "line 2: modulo by zero"


def test_null_field_dereference():
    check_error(NULL_FIELD, expected_line=4)


def test_uninitialized_variable_read():
    check_error(UNINIT_READ, expected_line=3)


def test_uninitialized_field_read():
    source = (
        "struct S { int v; };\n"
        "void main() {\n"
        "  S* p = new S();\n"
        "  int x = p->v;\n"
        "}\n"
    )
    session = DebugSession(parse_program(source, "cpp"))
    session.step_into()
    session.step_into()
    assert session.status == "error"
    assert session.error == "line 4: read of uninitialized field 'v'"


def test_dangling_pointer_dereference():
    session = check_error(DANGLING, expected_line=7)
    assert "dangling pointer dereference" in session.error


def test_error_snapshot_keeps_failing_frame():
    session = run_session(DIV_ZERO)
    last = session.trace.get(session.trace.count - 1)
    assert [f.function_name for f in last.frames()] == ["main"]
    assert last.threads[0].status == "paused"


def test_missing_return_value_error():
    source = (
        "int f(int n) {\n"
        "  if (n > 0) {\n"
        "    return 1;\n"
        "  }\n"
        "}\n"
        "void main() {\n"
        "  int a = f(1);\n"
        "  int b = f(0);\n"
        "}\n"
    )
    program = parse_program(source, "cpp")
    session = DebugSession(program)
    while session.status == "paused":
        session.step_into()
    assert session.status == "error"
    assert session.error == "line 5: function 'f' ended without returning a value"
    last = session.trace.get(session.trace.count - 1)
    # the failing frame is preserved for inspection
    assert [f.function_name for f in last.frames()] == ["f", "main"]


def test_stack_overflow():
    source = "void down() {\n  down();\n}\nvoid main() {\n  down();\n}\n"
    program = parse_program(source, "cpp")
    session = DebugSession(program)
    session.run_to_breakpoint()
    assert session.status == "error"
    assert "stack overflow" in session.error


def test_stepping_after_error_raises():
    session = run_session(DIV_ZERO)
    with pytest.raises(SessionFinishedError):
        session.step_into()


def test_short_circuit_avoids_division():
    source = "void main() {\n  int z = 0;\n  bool ok = z != 0 && 1 / z > 0;\n  bool other = true || 1 / z > 0;\n}\n"
    session = DebugSession(parse_program(source, "cpp"))
    while session.status == "paused":
        session.step_into()
    assert session.status == "finished"


def test_truncating_division_and_modulo():
    source = (
        "void main() {\n"
        "  int a = -7 / 2;\n"
        "  int b = 7 / -2;\n"
        "  int c = -7 % 2;\n"
        "  int d = 7 % -2;\n"
        "}\n"
    )
    session = DebugSession(parse_program(source, "cpp"))
    while session.status == "paused":
        session.step_into()
    last = session.trace.get(session.trace.count - 2)  # before stack pops
    values = frame_vars(last)
    assert values == {"a": -3, "b": -3, "c": -1, "d": 1}


# -- recursion ------------------------------------------------------------------------


def test_recursion_depth_and_result():
    session = run_session(RECURSION)
    max_depth = max(len(s.frames()) for s in session.trace.snapshots)
    assert max_depth >= 3
    assert session.status == "finished"


# -- in-process trace ------------------------------------------------------------------


def test_memory_trace_rejects_gaps():
    session = start(LISTING1)
    trace = MemoryTrace()
    snap = session.trace.get(0)
    trace.append(snap)
    with pytest.raises(ValueError) as exc_info:
        trace.append(snap)  # same stepIndex again
    assert "does not extend trace" in str(exc_info.value)
