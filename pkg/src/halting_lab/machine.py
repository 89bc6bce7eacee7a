"""Deterministic stack machine for HL programs.

Memory is one linear address space. Cells ``[0, len(image))`` hold the bytes
of the program's canonical source and never change; call frames are stacked
upward directly above the image. A frame's cells are its parameters followed
by its locals, so ``addr_of(v)`` is a pure function of the declarations and
the live call chain.

Every step executes exactly one instruction. Executing ``HALT(p, i)`` hands
the current :class:`CallContext` to an oracle object whose ``decide`` method
returns :class:`Return`, :class:`TrapHaltAll` or :class:`Undecided`.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Protocol, Sequence, Union

from .lang import (
    AddrOf, Arg, Assign, BinOp, Call, FunctionDef, Halt, HaltCall, If, Load,
    Name, Num, Print, Prog, Program, Return as ReturnStmt, StrLit, Value, While,
    string_offsets, wrap,
)

DEFAULT_MEMORY_SIZE = 65_536
DIGEST_ALGORITHM = "sha256"

RUNNING = "running"
HALTED = "halted"
TRAPPED = "trapped"

HALT_ALL = "halt-all"
ORACLE_UNDECIDED = "oracle-undecided"


def digest(image) -> str:
    """Hex SHA-256 of a program image (SourceImage, Program or raw bytes)."""
    if isinstance(image, Program):
        image = image.image
    data = image if isinstance(image, (bytes, bytearray)) else image.data
    return hashlib.sha256(data).hexdigest()


class FrameOverflow(Exception):
    pass


class ContextUnavailable(Exception):
    pass


# ---------------------------------------------------------------------------
# oracle decisions


@dataclass(frozen=True)
class Return:
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"oracle bit must be 0 or 1, got {self.bit!r}")


@dataclass(frozen=True)
class TrapHaltAll:
    pass


@dataclass(frozen=True)
class Undecided:
    reason: str


Decision = Union[Return, TrapHaltAll, Undecided]


def decision_label(d: Decision) -> str:
    if isinstance(d, Return):
        return f"return {d.bit}"
    if isinstance(d, TrapHaltAll):
        return "trap-halt-all"
    return f"undecided ({d.reason})"


@dataclass(frozen=True)
class CallContext:
    image_digest: str
    frame_chain: tuple[str, ...]
    entry_is_main: bool


class Oracle(Protocol):
    name: str

    def decide(self, prog: Value, inp: Value, ctx: CallContext) -> Decision: ...


# ---------------------------------------------------------------------------
# compilation


def _compile_function(fn: FunctionDef, str_offsets) -> tuple:
    slot = {name: i for i, name in enumerate(fn.cells)}
    code: list = []

    def expr(e):
        if isinstance(e, Num):
            code.append(("const", e.value))
        elif isinstance(e, Name):
            code.append(("get", slot[e.name]))
        elif isinstance(e, BinOp):
            expr(e.left)
            expr(e.right)
            code.append(("bin", e.op))
        elif isinstance(e, Call):
            for a in e.args:
                expr(a)
            code.append(("call", e.name, len(e.args)))
        elif isinstance(e, HaltCall):
            expr(e.prog)
            expr(e.inp)
            code.append(("oracle",))
        elif isinstance(e, AddrOf):
            code.append(("addr", slot[e.name]))
        elif isinstance(e, Load):
            expr(e.addr)
            code.append(("load",))
        elif isinstance(e, Arg):
            code.append(("arg", e.index))
        else:
            raise TypeError(e)

    def block(body):
        for s in body:
            if isinstance(s, Assign):
                expr(s.expr)
                code.append(("set", slot[s.name]))
            elif isinstance(s, If):
                expr(s.cond)
                jz = len(code)
                code.append(None)
                block(s.then)
                if s.orelse is None:
                    code[jz] = ("jz", len(code))
                else:
                    jmp = len(code)
                    code.append(None)
                    code[jz] = ("jz", len(code))
                    block(s.orelse)
                    code[jmp] = ("jmp", len(code))
            elif isinstance(s, While):
                top = len(code)
                expr(s.cond)
                jz = len(code)
                code.append(None)
                block(s.body)
                code.append(("jmp", top))
                code[jz] = ("jz", len(code))
            elif isinstance(s, Halt):
                code.append(("halt",))
            elif isinstance(s, Print):
                for a in s.args:
                    if isinstance(a, StrLit):
                        code.append(("str", next(str_offsets), len(a.value)))
                    else:
                        expr(a)
                code.append(("print", len(s.args)))
            elif isinstance(s, ReturnStmt):
                expr(s.expr)
                code.append(("ret",))
            else:
                raise TypeError(s)

    block(fn.body)
    code += [("const", 0), ("ret",)]
    return tuple(code)


_compiled: dict = {}


def compile_program(p: Program) -> dict[str, tuple]:
    """Bytecode per function. String literals compile to image slices."""
    key = (p.image.data, p.functions)
    if key not in _compiled:
        offsets = iter(string_offsets(p.image))
        _compiled[key] = {fn.name: _compile_function(fn, offsets) for fn in p.functions}
    return _compiled[key]


# ---------------------------------------------------------------------------
# state


@dataclass
class Frame:
    function: str
    base: int
    cells: list
    return_site: int | None = None  # caller's resume position
    pc: int = 0
    stack: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class Outcome:
    status: str  # "halted" | "diverged-budget" | "trapped"
    steps: int
    output: tuple[str, ...] = ()
    trap_reason: str | None = None

    @property
    def halted(self) -> bool:
        """True for a normal halt and for any trap."""
        return self.status in (HALTED, TRAPPED)

    def to_json(self) -> dict:
        d = {"status": self.status, "steps": self.steps, "output": list(self.output)}
        if self.trap_reason is not None:
            d["trap_reason"] = self.trap_reason
        return d


class _Trap(Exception):
    pass


def _int(v) -> int:
    if type(v) is not int:
        raise _Trap("type-error")
    return v


def _format(v) -> str:
    if isinstance(v, bytes):
        return v.decode("ascii")
    if isinstance(v, Prog):
        return f"<prog sha256:{digest(v.image)[:16]}>"
    return str(v)


def _binop(op: str, a, b):
    if op in ("==", "!="):
        if type(a) is int and type(b) is int or isinstance(a, Prog) and isinstance(b, Prog):
            return int((a == b) == (op == "=="))
        raise _Trap("type-error")
    a, b = _int(a), _int(b)
    if op == "+":
        return wrap(a + b)
    if op == "-":
        return wrap(a - b)
    if op == "*":
        return wrap(a * b)
    if op == "/":
        if b == 0:
            raise _Trap("division-by-zero")
        q = abs(a) // abs(b)
        return wrap(q if (a < 0) == (b < 0) else -q)
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "&":
        return a & b
    if op == "<<":
        return wrap(a << (b & 63))
    if op == ">>":
        return a >> (b & 63)
    raise ValueError(op)


class Machine:
    """A single HL run. Mutated only by :meth:`step`."""

    def __init__(self, program: Program, inputs: Sequence[Value] = (),
                 memory_size: int = DEFAULT_MEMORY_SIZE):
        self.program = program
        self.inputs = tuple(inputs)
        self.memory_size = memory_size
        self.image = program.image.data
        self.code = compile_program(program)
        self.defs = {fn.name: fn for fn in program.functions}
        main = self.defs[program.entry]
        base = len(self.image)
        if base + main.frame_size > memory_size:
            raise FrameOverflow(
                f"main frame needs {main.frame_size} cells above a {base}-byte image; "
                f"memory size is {memory_size}"
            )
        self.frames = [Frame(main.name, base, [0] * main.frame_size)]
        self.step_count = 0
        self.status = RUNNING
        self.trap_reason: str | None = None
        self.output: list[str] = []
        self._digest: str | None = None

    # -- inspection ---------------------------------------------------------

    @property
    def top(self) -> int:
        """First address above the live frames."""
        f = self.frames[-1]
        return f.base + f.size

    def read(self, addr: int):
        """Memory read with ``load`` semantics; raises IndexError off the map."""
        if 0 <= addr < len(self.image):
            return self.image[addr]
        for f in self.frames:
            if f.base <= addr < f.base + f.size:
                return f.cells[addr - f.base]
        raise IndexError(addr)

    @property
    def memory(self) -> list:
        """Snapshot of the mapped memory: image bytes then every frame cell."""
        cells = list(self.image)
        for f in self.frames:
            cells.extend(f.cells)
        return cells

    def current_instruction(self) -> tuple | None:
        if self.status != RUNNING:
            return None
        f = self.frames[-1]
        return self.code[f.function][f.pc]

    def config_key(self) -> tuple:
        return tuple((f.function, f.pc, tuple(f.cells), tuple(f.stack)) for f in self.frames)

    def image_digest(self) -> str:
        if self._digest is None:
            self._digest = digest(self.image)
        return self._digest

    def current_context(self) -> CallContext:
        ins = self.current_instruction()
        if ins is None or ins[0] != "oracle":
            raise ContextUnavailable("machine is not at a HALT invocation")
        chain = tuple(f.function for f in self.frames)
        return CallContext(
            self.image_digest(),
            chain,
            len(chain) == 1 and chain[0] == self.program.entry,
        )

    # -- execution ----------------------------------------------------------

    def step(self, oracle: Oracle) -> "Machine":
        if self.status != RUNNING:
            raise RuntimeError(f"cannot step a {self.status} machine")
        try:
            self._exec(oracle)
        except _Trap as t:
            self.status = TRAPPED
            self.trap_reason = t.args[0]
        self.step_count += 1
        return self

    def _exec(self, oracle: Oracle) -> None:
        f = self.frames[-1]
        ins = self.code[f.function][f.pc]
        op = ins[0]
        f.pc += 1
        stack = f.stack
        if op == "const":
            stack.append(ins[1])
        elif op == "get":
            stack.append(f.cells[ins[1]])
        elif op == "set":
            f.cells[ins[1]] = stack.pop()
        elif op == "bin":
            b = stack.pop()
            a = stack.pop()
            stack.append(_binop(ins[1], a, b))
        elif op == "jz":
            if _int(stack.pop()) == 0:
                f.pc = ins[1]
        elif op == "jmp":
            f.pc = ins[1]
        elif op == "str":
            stack.append(self.image[ins[1] : ins[1] + ins[2]])
        elif op == "print":
            n = ins[1]
            parts = stack[len(stack) - n :]
            del stack[len(stack) - n :]
            self.output.append("".join(_format(v) for v in parts))
        elif op == "addr":
            stack.append(f.base + ins[1])
        elif op == "load":
            addr = _int(stack.pop())
            try:
                stack.append(self.read(addr))
            except IndexError:
                raise _Trap("load-out-of-range") from None
        elif op == "arg":
            if ins[1] >= len(self.inputs):
                raise _Trap("arg-out-of-range")
            stack.append(self.inputs[ins[1]])
        elif op == "call":
            name, n = ins[1], ins[2]
            callee = self.defs.get(name)
            if callee is None:
                raise _Trap("call-to-unknown-function")
            if len(callee.params) != n:
                raise _Trap("type-error")
            args = stack[len(stack) - n :]
            del stack[len(stack) - n :]
            base = f.base + f.size
            if base + callee.frame_size > self.memory_size:
                raise _Trap("frame-overflow")
            cells = args + [0] * len(callee.locals)
            self.frames.append(Frame(name, base, cells, return_site=f.pc))
        elif op == "ret":
            value = stack.pop()
            self.frames.pop()
            if not self.frames:
                # returning from the entry function ends the program
                self.frames.append(f)
                self.status = HALTED
            else:
                self.frames[-1].stack.append(value)
        elif op == "halt":
            self.status = HALTED
        elif op == "oracle":
            f.pc -= 1
            ctx = self.current_context()
            f.pc += 1
            inp = stack.pop()
            prog = stack.pop()
            if not isinstance(prog, Prog):
                raise _Trap("type-error")
            decision = oracle.decide(prog, inp, ctx)
            if isinstance(decision, Return):
                stack.append(decision.bit)
            elif isinstance(decision, TrapHaltAll):
                raise _Trap(HALT_ALL)
            else:
                raise _Trap(ORACLE_UNDECIDED)
        else:
            raise ValueError(f"bad opcode {op!r}")

    def outcome(self) -> Outcome:
        if self.status == RUNNING:
            return Outcome("diverged-budget", self.step_count, tuple(self.output))
        return Outcome(self.status, self.step_count, tuple(self.output), self.trap_reason)

    def run(self, oracle: Oracle, budget: int) -> Outcome:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        while self.status == RUNNING and self.step_count < budget:
            self.step(oracle)
        return self.outcome()


# ---------------------------------------------------------------------------
# functional surface


def init(p: Program, inputs: Sequence[Value] = (), memory_size: int = DEFAULT_MEMORY_SIZE) -> Machine:
    return Machine(p, inputs, memory_size)


def step(s: Machine, oracle: Oracle) -> Machine:
    return s.step(oracle)


def run(p: Program, inputs: Sequence[Value], oracle: Oracle, budget: int,
        memory_size: int = DEFAULT_MEMORY_SIZE) -> Outcome:
    return Machine(p, inputs, memory_size).run(oracle, budget)


def current_context(s: Machine) -> CallContext:
    return s.current_context()


def config_key(s: Machine) -> tuple:
    return s.config_key()
