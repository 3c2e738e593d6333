"""Tree-walking interpreter that pauses at every statement boundary.

The interpreter is a generator: it yields a PauseEvent before executing each
statement and once more at every function's closing brace (the function-exit
pause point). DebugSession drives the generator and captures one snapshot per
pause, so execution can be replayed or navigated after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..analysis import annotate_heap_names
from ..model import (
    Char,
    HeapObject,
    Ref,
    Snapshot,
    StackFrame,
    ThreadState,
    VariableRecord,
    ensure_valid,
    now_ms,
)
from .checker import Program
from .parser import CPP, JAVA
from .syntax import (
    Assign,
    Binary,
    BoolLit,
    CallExpr,
    CharLit,
    ExprStmt,
    FieldRead,
    IfStmt,
    IntLit,
    NewExpr,
    NullLit,
    ReturnStmt,
    StrLit,
    Unary,
    VarDecl,
    VarRead,
    WhileStmt,
)

STACK_BASE = 0x00007FFFFFFF0000
FRAME_STRIDE = 0x1000
SLOT_SIZE = 8
HEAP_BASE = 0x0000000001000000
GLOBAL_BASE = 0x0000000000601000
MAX_CALL_DEPTH = 128


class MiniRuntimeError(Exception):
    """A fault raised by the running program, anchored to a source line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.message = message
        self.line = line


class BreakpointError(Exception):
    def __init__(self, line: int):
        super().__init__(f"line {line} is not an executable statement")
        self.line = line
        self.message = f"line {line} is not an executable statement"


class SessionFinishedError(Exception):
    def __init__(self):
        super().__init__("session finished")


# ---------------------------------------------------------------------------
# Runtime values. Scalars reuse Python ints/bools and the model's Char.


class _Null:
    __slots__ = ()

    def __repr__(self):
        return "NULL"


class _Uninit:
    __slots__ = ()

    def __repr__(self):
        return "UNINIT"


NULL = _Null()
UNINIT = _Uninit()


@dataclass(frozen=True)
class HeapRef:
    id: str


@dataclass(frozen=True)
class AddrValue:
    addr: int


def _fmt_addr(addr: int) -> str:
    return f"0x{addr:016x}"


def to_model_value(v):
    """Map a runtime value onto its snapshot encoding."""
    if v is NULL:
        return None
    if v is UNINIT:
        return "uninit"
    if isinstance(v, HeapRef):
        return Ref(v.id)
    if isinstance(v, AddrValue):
        return _fmt_addr(v.addr)
    return v  # int, bool, Char, str


@dataclass
class HeapCell:
    id: str
    type_name: str
    fields: dict  # name -> runtime value, declaration order
    field_types: dict
    addr: int = 0  # 0 in the java dialect


@dataclass
class FrameRT:
    function: object  # FunctionDecl
    depth: int  # 0 for main, grows with each call
    line: int
    slots: dict = field(default_factory=dict)  # name -> value, execution order
    decls: dict = field(default_factory=dict)  # name -> (declared_type, kind)
    addresses: dict = field(default_factory=dict)  # name -> int, cpp only
    next_ordinal: int = 0


@dataclass
class VmState:
    dialect: str
    call_stack: list = field(default_factory=list)
    heap: dict = field(default_factory=dict)  # id -> HeapCell, allocation order
    globals: dict = field(default_factory=dict)
    global_addrs: dict = field(default_factory=dict)
    addr_map: dict = field(default_factory=dict)  # int -> location descriptor
    next_object: int = 1
    next_address: int = HEAP_BASE
    current_line: int = 0


@dataclass(frozen=True)
class PauseEvent:
    line: int
    kind: str  # "statement" | "exit"


@dataclass(frozen=True)
class _ReturnSignal:
    value: object


class Interpreter:
    def __init__(self, program: Program):
        self.program = program
        self.vm = VmState(dialect=program.dialect)
        if program.dialect == CPP:
            for k, g in enumerate(program.globals):
                addr = GLOBAL_BASE + SLOT_SIZE * k
                self.vm.globals[g.name] = (
                    self._literal_value(g.init) if g.init is not None else self._zero_cpp(g.decl_type)
                )
                self.vm.global_addrs[g.name] = addr
                self.vm.addr_map[addr] = ("global", g.name)

    @staticmethod
    def _literal_value(e):
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, CharLit):
            return Char(e.value)
        if isinstance(e, NullLit):
            return NULL
        raise AssertionError("checker admits only literal global initializers")

    @staticmethod
    def _zero_cpp(t: str):
        # static storage is zero-initialized; a zero pointer is null
        if t == "int":
            return 0
        if t == "bool":
            return False
        if t == "char":
            return Char("\0")
        return NULL

    def _zero_java(self, t: str):
        if t == "int":
            return 0
        if t == "boolean":
            return False
        if t == "char":
            return Char("\0")
        return NULL  # String, records, arrays

    @property
    def depth(self) -> int:
        return len(self.vm.call_stack)

    def run(self):
        main = self.program.main
        args = [NULL] if main.params else []
        result = yield from self._call(main, args, main.line)
        return result

    # -- frames ------------------------------------------------------------

    def _push_frame(self, func, argvals, call_line):
        vm = self.vm
        if len(vm.call_stack) >= MAX_CALL_DEPTH:
            raise MiniRuntimeError("stack overflow", call_line)
        frame = FrameRT(function=func, depth=len(vm.call_stack), line=func.line)
        vm.call_stack.append(frame)
        for p, v in zip(func.params, argvals):
            self._declare(frame, p.name, p.decl_type, "argument", v)
        return frame

    def _pop_frame(self):
        frame = self.vm.call_stack.pop()
        for addr in frame.addresses.values():
            self.vm.addr_map.pop(addr, None)

    def _declare(self, frame, name, decl_type, kind, value):
        frame.decls[name] = (decl_type, kind)
        frame.slots[name] = value
        if self.vm.dialect == CPP:
            base = STACK_BASE - FRAME_STRIDE * frame.depth
            addr = base - SLOT_SIZE * (frame.next_ordinal + 1)
            frame.next_ordinal += 1
            frame.addresses[name] = addr
            self.vm.addr_map[addr] = ("slot", frame, name)

    # -- execution ------------------------------------------------------------

    def _call(self, func, argvals, call_line):
        frame = self._push_frame(func, argvals, call_line)
        signal = yield from self._exec_block(func.body)
        self.vm.current_line = func.close_line
        frame.line = func.close_line
        yield PauseEvent(func.close_line, "exit")
        if signal is None and func.return_type != "void":
            raise MiniRuntimeError(
                f"function '{func.name}' ended without returning a value", func.close_line
            )
        self._pop_frame()
        return signal.value if signal is not None else NULL

    def _exec_block(self, stmts):
        for stmt in stmts:
            self._pause_at(stmt.line)
            yield PauseEvent(stmt.line, "statement")
            signal = yield from self._exec_stmt(stmt)
            if signal is not None:
                return signal
        return None

    def _pause_at(self, line):
        self.vm.current_line = line
        self.vm.call_stack[-1].line = line

    def _exec_stmt(self, stmt):
        if isinstance(stmt, VarDecl):
            value = UNINIT
            if stmt.init is not None:
                value = yield from self._eval(stmt.init)
            self._declare(self.vm.call_stack[-1], stmt.name, stmt.decl_type, "local", value)
            return None
        if isinstance(stmt, Assign):
            yield from self._exec_assign(stmt)
            return None
        if isinstance(stmt, ExprStmt):
            yield from self._eval(stmt.expr)
            return None
        if isinstance(stmt, ReturnStmt):
            value = NULL
            if stmt.value is not None:
                value = yield from self._eval(stmt.value)
            return _ReturnSignal(value)
        if isinstance(stmt, IfStmt):
            cond = yield from self._eval(stmt.cond)
            if cond:
                signal = yield from self._exec_block(stmt.then_body)
            elif stmt.else_body is not None:
                signal = yield from self._exec_block(stmt.else_body)
            else:
                signal = None
            return signal
        if isinstance(stmt, WhileStmt):
            while True:
                cond = yield from self._eval(stmt.cond)
                if not cond:
                    return None
                signal = yield from self._exec_block(stmt.body)
                if signal is not None:
                    return signal
                # pause again at the loop header before re-testing
                self._pause_at(stmt.line)
                yield PauseEvent(stmt.line, "statement")
        raise AssertionError(f"unhandled statement {stmt!r}")

    def _exec_assign(self, stmt):
        target = stmt.target
        if isinstance(target, VarRead):
            value = yield from self._eval(stmt.value)
            frame = self.vm.call_stack[-1]
            if target.name in frame.slots:
                frame.slots[target.name] = value
            else:
                self.vm.globals[target.name] = value
            return
        if isinstance(target, FieldRead):
            cell = yield from self._field_cell(target)
            value = yield from self._eval(stmt.value)
            cell.fields[target.field] = value
            return
        if isinstance(target, Unary) and target.op == "*":
            ptr = yield from self._eval(target.operand)
            value = yield from self._eval(stmt.value)
            self._addr_store(ptr, value, target.line)
            return
        raise AssertionError(f"unhandled assignment target {target!r}")

    def _field_cell(self, e: FieldRead):
        """Resolve the heap cell a field access goes through."""
        if e.arrow or (isinstance(e.obj, Unary) and e.obj.op == "*"):
            source = e.obj.operand if not e.arrow else e.obj
            ptr = yield from self._eval(source)
            return self._deref_cell(ptr, e.line)
        obj = yield from self._eval(e.obj)
        return self._deref_cell(obj, e.line)

    def _deref_cell(self, v, line) -> HeapCell:
        if v is NULL:
            raise MiniRuntimeError("null dereference", line)
        if isinstance(v, HeapRef):
            return self.vm.heap[v.id]
        raise MiniRuntimeError("dangling pointer dereference", line)

    # -- pointer memory ---------------------------------------------------------

    def _resolve_addr(self, ptr, line):
        if ptr is NULL:
            raise MiniRuntimeError("null dereference", line)
        if not isinstance(ptr, AddrValue):
            raise MiniRuntimeError("dangling pointer dereference", line)
        desc = self.vm.addr_map.get(ptr.addr)
        if desc is None:
            raise MiniRuntimeError("dangling pointer dereference", line)
        return desc

    def _addr_read(self, ptr, line):
        desc = self._resolve_addr(ptr, line)
        if desc[0] == "slot":
            value = desc[1].slots[desc[2]]
        elif desc[0] == "global":
            value = self.vm.globals[desc[1]]
        else:  # field
            value = desc[1].fields[desc[2]]
        if value is UNINIT:
            raise MiniRuntimeError("read of uninitialized memory", line)
        return value

    def _addr_store(self, ptr, value, line):
        desc = self._resolve_addr(ptr, line)
        if desc[0] == "slot":
            desc[1].slots[desc[2]] = value
        elif desc[0] == "global":
            self.vm.globals[desc[1]] = value
        else:
            desc[1].fields[desc[2]] = value

    def _lvalue_addr(self, e, line):
        """Address of a variable or field; operand of '&'."""
        if isinstance(e, VarRead):
            frame = self.vm.call_stack[-1]
            if e.name in frame.addresses:
                return AddrValue(frame.addresses[e.name])
            if e.name in self.vm.global_addrs:
                return AddrValue(self.vm.global_addrs[e.name])
            raise MiniRuntimeError(f"variable '{e.name}' has no address yet", line)
        cell = yield from self._field_cell(e)
        index = list(cell.fields).index(e.field)
        return AddrValue(cell.addr + SLOT_SIZE * index)

    # -- allocation ---------------------------------------------------------------

    def _alloc_record(self, type_name: str) -> HeapRef:
        vm = self.vm
        rec = self.program.records[type_name]
        if vm.dialect == CPP:
            # cpp identity is the object's own address; java uses a counter
            size = max(16, SLOT_SIZE * max(1, len(rec.fields)))
            size = (size + 15) // 16 * 16
            addr = vm.next_address
            vm.next_address += size
            oid = f"0x{addr:016x}"
        else:
            addr = 0
            oid = f"obj-{vm.next_object}"
            vm.next_object += 1
        cell = HeapCell(oid, type_name, {}, {})
        cell.addr = addr
        for i, f in enumerate(rec.fields):
            if vm.dialect == JAVA:
                cell.fields[f.name] = self._zero_java(f.decl_type)
            else:
                # the cpp dialect allocates raw memory: fields start uninitialized
                cell.fields[f.name] = UNINIT
                vm.addr_map[cell.addr + SLOT_SIZE * i] = ("field", cell, f.name)
            cell.field_types[f.name] = f.decl_type
        vm.heap[oid] = cell
        return HeapRef(oid)

    def _alloc_string(self, text: str) -> HeapRef:
        vm = self.vm
        oid = f"obj-{vm.next_object}"
        vm.next_object += 1
        cell = HeapCell(oid, "java.lang.String", {"value": text}, {"value": "char[]"})
        vm.heap[oid] = cell
        return HeapRef(oid)

    # -- evaluation -----------------------------------------------------------------

    def _eval(self, e):
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, CharLit):
            return Char(e.value)
        if isinstance(e, NullLit):
            return NULL
        if isinstance(e, StrLit):
            return self._alloc_string(e.value)
        if isinstance(e, NewExpr):
            return self._alloc_record(e.type_name)
        if isinstance(e, VarRead):
            return self._read_var(e)
        if isinstance(e, FieldRead):
            cell = yield from self._field_cell(e)
            value = cell.fields[e.field]
            if value is UNINIT:
                raise MiniRuntimeError(f"read of uninitialized field '{e.field}'", e.line)
            return value
        if isinstance(e, Unary):
            if e.op == "&":
                addr = yield from self._lvalue_addr(e.operand, e.line)
                return addr
            operand = yield from self._eval(e.operand)
            if e.op == "-":
                return -operand
            if e.op == "!":
                return not operand
            if e.op == "*":
                return self._addr_read(operand, e.line)
            raise AssertionError(f"unhandled unary {e.op!r}")
        if isinstance(e, Binary):
            result = yield from self._eval_binary(e)
            return result
        if isinstance(e, CallExpr):
            func = self.program.functions[e.name]
            argvals = []
            for a in e.args:
                v = yield from self._eval(a)
                argvals.append(v)
            result = yield from self._call(func, argvals, e.line)
            return result
        raise AssertionError(f"unhandled expression {e!r}")

    def _read_var(self, e: VarRead):
        frame = self.vm.call_stack[-1]
        if e.name in frame.slots:
            value = frame.slots[e.name]
        elif e.name in self.vm.globals:
            value = self.vm.globals[e.name]
        else:
            raise AssertionError(f"checker admitted unknown variable {e.name!r}")
        if value is UNINIT:
            raise MiniRuntimeError(f"read of uninitialized variable '{e.name}'", e.line)
        return value

    def _eval_binary(self, e: Binary):
        op = e.op
        if op in ("&&", "||"):
            left = yield from self._eval(e.left)
            if op == "&&" and not left:
                return False
            if op == "||" and left:
                return True
            right = yield from self._eval(e.right)
            return bool(right)
        left = yield from self._eval(e.left)
        right = yield from self._eval(e.right)
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op in ("/", "%"):
            if right == 0:
                raise MiniRuntimeError(
                    "division by zero" if op == "/" else "modulo by zero", e.line
                )
            quotient = abs(left) // abs(right)
            if (left < 0) != (right < 0):
                quotient = -quotient
            if op == "/":
                return quotient
            return left - right * quotient
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        raise AssertionError(f"unhandled operator {op!r}")


# ---------------------------------------------------------------------------
# Snapshot capture.


def capture_state(vm: VmState, program: Program, step_index: int, error=None, timestamp_ms=None) -> Snapshot:
    """Freeze the full machine state into a validated snapshot."""
    cpp = vm.dialect == CPP
    frames = []
    for i, fr in enumerate(reversed(vm.call_stack)):
        args = []
        locs = []
        for name, value in fr.slots.items():
            decl_type, kind = fr.decls[name]
            address = _fmt_addr(fr.addresses[name]) if cpp else None
            record = VariableRecord(
                name=name,
                declared_type=decl_type,
                value=to_model_value(value),
                kind=kind,
                address=address,
            )
            (args if kind == "argument" else locs).append(record)
        frames.append(
            StackFrame(
                function_name=fr.function.name,
                frame_index=i,
                line=fr.line,
                arguments=tuple(args),
                locals=tuple(locs),
            )
        )

    heap = []
    for cell in vm.heap.values():
        fields = []
        for j, (fname, fval) in enumerate(cell.fields.items()):
            fields.append(
                VariableRecord(
                    name=fname,
                    declared_type=cell.field_types[fname],
                    value=to_model_value(fval),
                    kind="field",
                    address=_fmt_addr(cell.addr + SLOT_SIZE * j) if cpp else None,
                )
            )
        heap.append(HeapObject(id=cell.id, runtime_type=cell.type_name, fields=tuple(fields)))

    if cpp:
        gvars = tuple(
            VariableRecord(
                name=g.name,
                declared_type=g.decl_type,
                value=to_model_value(vm.globals[g.name]),
                kind="global",
                address=_fmt_addr(vm.global_addrs[g.name]),
            )
            for g in program.globals
        )
        snapshot = Snapshot(
            language=CPP,
            step_index=step_index,
            line_number=vm.current_line,
            timestamp_ms=now_ms() if timestamp_ms is None else timestamp_ms,
            stack=tuple(frames),
            heap=tuple(heap),
            global_static_variables=gvars,
            error=error,
        )
    else:
        status = "paused" if frames else "finished"
        thread = ThreadState(name="main", status=status, stack=tuple(frames))
        snapshot = Snapshot(
            language=JAVA,
            step_index=step_index,
            line_number=vm.current_line,
            timestamp_ms=now_ms() if timestamp_ms is None else timestamp_ms,
            threads=(thread,),
            heap=tuple(heap),
            error=error,
        )
    snapshot = annotate_heap_names(snapshot)
    ensure_valid(snapshot)
    return snapshot


# ---------------------------------------------------------------------------
# Stepping.


class MemoryTrace:
    """Minimal in-process snapshot sink; mirrors the persistent trace interface."""

    def __init__(self):
        self.snapshots = []
        self.implicit_flags = []

    @property
    def count(self) -> int:
        return len(self.snapshots)

    def append(self, snapshot: Snapshot, implicit: bool = False):
        if snapshot.step_index != len(self.snapshots):
            raise ValueError(
                f"snapshot stepIndex {snapshot.step_index} does not extend trace of {len(self.snapshots)}"
            )
        self.snapshots.append(snapshot)
        self.implicit_flags.append(implicit)

    def get(self, step: int) -> Snapshot:
        return self.snapshots[step]

    def is_implicit(self, step: int) -> bool:
        return self.implicit_flags[step]


class DebugSession:
    """Drives one program execution, appending a snapshot per pause event.

    Commands append exactly one visible snapshot; any pauses they skip over
    are appended as implicit snapshots so the full history stays navigable.
    """

    def __init__(self, program: Program, breakpoints=(), trace=None):
        for line in sorted(set(breakpoints)):
            if line not in program.executable_lines:
                raise BreakpointError(line)
        self.program = program
        self.breakpoints = frozenset(breakpoints)
        self.trace = trace if trace is not None else MemoryTrace()
        self.interp = Interpreter(program)
        self._events = self.interp.run()
        self.status = "paused"
        self.error = None
        self.last_snapshot = None
        outcome = self._advance()
        # a checked program always has at least one pause event
        assert outcome == "paused" or self.error is not None
        self._settle(outcome)

    @property
    def vm(self) -> VmState:
        return self.interp.vm

    def _require_paused(self):
        if self.status != "paused":
            raise SessionFinishedError()

    def _advance(self) -> str:
        try:
            next(self._events)
            return "paused"
        except StopIteration:
            return "finished"
        except MiniRuntimeError as exc:
            self.error = str(exc)
            self.vm.current_line = exc.line
            return "error"

    def _append(self, implicit: bool) -> Snapshot:
        snapshot = capture_state(
            self.vm, self.program, step_index=self.trace.count, error=self.error
        )
        self.trace.append(snapshot, implicit=implicit)
        self.last_snapshot = snapshot
        return snapshot

    def _settle(self, outcome: str) -> Snapshot:
        if outcome == "finished":
            self.status = "finished"
        elif outcome == "error":
            self.status = "error"
        return self._append(implicit=False)

    def _run_command(self, should_continue) -> Snapshot:
        self._require_paused()
        outcome = self._advance()
        while outcome == "paused" and should_continue():
            self._append(implicit=True)
            outcome = self._advance()
        return self._settle(outcome)

    def step_into(self) -> Snapshot:
        return self._run_command(lambda: False)

    def step_over(self) -> Snapshot:
        depth = self.interp.depth
        return self._run_command(lambda: self.interp.depth > depth)

    def step_return(self) -> Snapshot:
        depth = self.interp.depth
        return self._run_command(lambda: self.interp.depth >= depth)

    def run_to_breakpoint(self) -> Snapshot:
        return self._run_command(lambda: self.vm.current_line not in self.breakpoints)
