"""The HL toy language: tokens, AST, parser, canonical serializer, quotation.

A program's canonical text is part of its identity. The machine loads the
canonical bytes into the bottom of memory, and the context-dependent oracle
compares program images byte for byte, so the serializer output is pinned:

* one statement per line, two-space indentation per block level,
* single spaces around binary operators and after commas,
* a blank line between function definitions, trailing newline (0x0A).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1

KEYWORDS = frozenset(
    {"fn", "var", "if", "else", "while", "halt", "print", "return",
     "HALT", "addr_of", "load", "arg"}
)

# lowest binding first
PRECEDENCE = {
    "&": 1,
    "==": 2, "!=": 2, "<": 2, "<=": 2, ">": 2, ">=": 2,
    "<<": 3, ">>": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
MAX_PRECEDENCE = max(PRECEDENCE.values())
MAX_NESTING = 150


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# values


@dataclass(frozen=True)
class SourceImage:
    """Exact program bytes. Equality ignores the diagnostic ``origin``."""

    data: bytes
    origin: str = field(default="<memory>", compare=False)

    def __len__(self) -> int:
        return len(self.data)

    def text(self) -> str:
        return self.data.decode("ascii")


@dataclass(frozen=True)
class Prog:
    """A quoted program: the program-as-value variant of Value."""

    image: SourceImage

    def __repr__(self) -> str:
        import hashlib

        return f"Prog(sha256:{hashlib.sha256(self.image.data).hexdigest()[:12]})"


# Int values are plain Python ints kept inside [INT_MIN, INT_MAX]; Str values
# are bytes and only ever flow into print.
Value = Union[int, Prog, bytes]


def wrap(n: int) -> int:
    """Reduce ``n`` to a signed 64-bit integer."""
    n &= 0xFFFF_FFFF_FFFF_FFFF
    return n - (1 << 64) if n > INT_MAX else n


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class HaltCall:
    prog: "Expr"
    inp: "Expr"


@dataclass(frozen=True)
class AddrOf:
    name: str


@dataclass(frozen=True)
class Load:
    addr: "Expr"


@dataclass(frozen=True)
class Arg:
    index: int


Expr = Union[Num, Name, BinOp, Call, HaltCall, AddrOf, Load, Arg]


@dataclass(frozen=True)
class StrLit:
    value: bytes


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] | None = None


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class Halt:
    pass


@dataclass(frozen=True)
class Print:
    args: tuple[Union[StrLit, Expr], ...]


@dataclass(frozen=True)
class Return:
    expr: Expr


Stmt = Union[Assign, If, While, Halt, Print, Return]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[str, ...]
    locals: tuple[str, ...]
    body: tuple[Stmt, ...]

    @property
    def cells(self) -> tuple[str, ...]:
        """Frame cell names: params then locals, in declaration order."""
        return self.params + self.locals

    @property
    def frame_size(self) -> int:
        return len(self.params) + len(self.locals)


@dataclass(frozen=True)
class Program:
    functions: tuple[FunctionDef, ...]
    image: SourceImage
    entry: str = "main"

    def function(self, name: str) -> FunctionDef:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    def same_ast(self, other: "Program") -> bool:
        return self.functions == other.functions and self.entry == other.entry


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    rb"""
    (?P<ws>[ \t\r\n]+)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[\x20\x21\x23-\x5b\x5d-\x7e]*")
  | (?P<op>==|!=|<=|>=|<<|>>|[-+*/<>&=(){},;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | "kw" | "str" | "op" | "eof"
    text: str
    line: int
    column: int
    raw: bytes = b""
    offset: int = 0


def tokenize(data: bytes) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(data):
        m = _TOKEN_RE.match(data, pos)
        col = pos - line_start + 1
        if m is None:
            ch = data[pos : pos + 1]
            if ch == b'"':
                raise ParseError("unterminated or invalid string literal", line, col)
            raise ParseError(f"unexpected byte {ch!r}", line, col)
        kind = m.lastgroup
        raw = m.group()
        if kind == "ws":
            nl = raw.count(b"\n")
            if nl:
                line += nl
                line_start = pos + raw.rindex(b"\n") + 1
        else:
            text = raw.decode("ascii")
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col, raw, pos))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected identifier, found {found!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def nest(self):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise self.error("nesting too deep")

    def program(self) -> list[tuple[FunctionDef, Token]]:
        fns = []
        while self.tok.kind != "eof":
            fns.append(self.fndef())
        if not fns:
            raise self.error("empty program")
        return fns

    def fndef(self) -> tuple[FunctionDef, Token]:
        self.expect("fn")
        name_tok = self.ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.ident().text)
            while self.at(","):
                self.pos += 1
                params.append(self.ident().text)
        self.expect(")")
        local_names = []
        if self.at("var"):
            self.pos += 1
            local_names.append(self.ident().text)
            while self.at(","):
                self.pos += 1
                local_names.append(self.ident().text)
            self.expect(";")
        body = self.block()
        return FunctionDef(name_tok.text, tuple(params), tuple(local_names), body), name_tok

    def block(self) -> tuple[Stmt, ...]:
        self.nest()
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.stmt())
        self.expect("}")
        self.depth -= 1
        return tuple(stmts)

    def stmt(self) -> Stmt:
        tok = self.tok
        if tok.kind == "ident":
            self.pos += 1
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return Assign(tok.text, e)
        if self.at("if"):
            self.pos += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            orelse = None
            if self.at("else"):
                self.pos += 1
                orelse = self.block()
            return If(cond, then, orelse)
        if self.at("while"):
            self.pos += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.block())
        if self.at("halt"):
            self.pos += 1
            self.expect(";")
            return Halt()
        if self.at("print"):
            self.pos += 1
            args = [self.printarg()]
            while self.at(","):
                self.pos += 1
                args.append(self.printarg())
            self.expect(";")
            return Print(tuple(args))
        if self.at("return"):
            self.pos += 1
            e = self.expr()
            self.expect(";")
            return Return(e)
        raise self.error(f"expected statement, found {tok.text or 'end of input'!r}")

    def printarg(self):
        if self.tok.kind == "str":
            tok = self.tok
            self.pos += 1
            return StrLit(tok.raw[1:-1])
        return self.expr()

    def expr(self, min_prec: int = 1) -> Expr:
        self.nest()
        left = self.atom()
        while self.tok.kind == "op" and PRECEDENCE.get(self.tok.text, 0) >= min_prec:
            op = self.tok.text
            self.pos += 1
            right = self.expr(PRECEDENCE[op] + 1)
            left = BinOp(op, left, right)
        self.depth -= 1
        return left

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            value = int(tok.text)
            if value > INT_MAX:
                raise self.error("integer literal out of 64-bit range", tok)
            return Num(value)
        if self.at("("):
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if self.at("HALT"):
            self.pos += 1
            self.expect("(")
            p = self.expr()
            self.expect(",")
            i = self.expr()
            self.expect(")")
            return HaltCall(p, i)
        if self.at("addr_of"):
            self.pos += 1
            self.expect("(")
            name = self.ident().text
            self.expect(")")
            return AddrOf(name)
        if self.at("load"):
            self.pos += 1
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return Load(e)
        if self.at("arg"):
            self.pos += 1
            self.expect("(")
            n = self.tok
            if n.kind != "int":
                raise self.error("arg() takes an integer literal")
            self.pos += 1
            self.expect(")")
            return Arg(int(n.text))
        if tok.kind == "ident":
            self.pos += 1
            if self.at("("):
                self.pos += 1
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.pos += 1
                        args.append(self.expr())
                self.expect(")")
                return Call(tok.text, tuple(args))
            return Name(tok.text)
        raise self.error(f"expected expression, found {tok.text or 'end of input'!r}")


def _children(node):
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, (Call, Print)):
        return node.args
    if isinstance(node, HaltCall):
        return (node.prog, node.inp)
    if isinstance(node, Load):
        return (node.addr,)
    if isinstance(node, (Assign, Return)):
        return (node.expr,)
    if isinstance(node, If):
        return (node.cond,) + node.then + (node.orelse or ())
    if isinstance(node, While):
        return (node.cond,) + node.body
    return ()


def _depth(body) -> int:
    """Maximum AST depth, computed without recursion."""
    deepest = 0
    stack = [(s, 1) for s in body]
    while stack:
        node, d = stack.pop()
        deepest = max(deepest, d)
        stack.extend((c, d + 1) for c in _children(node))
    return deepest


def _check(fns: list[tuple[FunctionDef, Token]]) -> None:
    """Name resolution: unique names, declared variables, known callees."""
    arity = {}
    for fn, tok in fns:
        if fn.name in arity:
            raise ParseError(f"duplicate function {fn.name!r}", tok.line, tok.column)
        arity[fn.name] = len(fn.params)
    if "main" not in arity:
        tok = fns[0][1]
        raise ParseError("program has no function named 'main'", tok.line, tok.column)

    for fn, tok in fns:
        def fail(msg):
            raise ParseError(f"in {fn.name!r}: {msg}", tok.line, tok.column)

        if len(set(fn.cells)) != len(fn.cells):
            fail("duplicate parameter or local name")
        cells = set(fn.cells)

        def expr(e):
            if isinstance(e, Name):
                if e.name not in cells:
                    fail(f"undeclared variable {e.name!r}")
            elif isinstance(e, AddrOf):
                if e.name not in cells:
                    fail(f"addr_of of undeclared variable {e.name!r}")
            elif isinstance(e, BinOp):
                expr(e.left)
                expr(e.right)
            elif isinstance(e, Call):
                if e.name not in arity:
                    fail(f"call to unknown function {e.name!r}")
                if len(e.args) != arity[e.name]:
                    fail(f"{e.name!r} takes {arity[e.name]} argument(s), got {len(e.args)}")
                for a in e.args:
                    expr(a)
            elif isinstance(e, HaltCall):
                expr(e.prog)
                expr(e.inp)
            elif isinstance(e, Load):
                expr(e.addr)

        def stmts(body):
            for s in body:
                if isinstance(s, Assign):
                    if s.name not in cells:
                        fail(f"assignment to undeclared variable {s.name!r}")
                    expr(s.expr)
                elif isinstance(s, If):
                    expr(s.cond)
                    stmts(s.then)
                    if s.orelse is not None:
                        stmts(s.orelse)
                elif isinstance(s, While):
                    expr(s.cond)
                    stmts(s.body)
                elif isinstance(s, Print):
                    for a in s.args:
                        if not isinstance(a, StrLit):
                            expr(a)
                elif isinstance(s, Return):
                    expr(s.expr)

        stmts(fn.body)


def parse(src: SourceImage | bytes | str, origin: str | None = None) -> Program:
    """Parse HL source. ``Program.image`` is always the canonical form."""
    if isinstance(src, SourceImage):
        data, origin = src.data, origin or src.origin
    elif isinstance(src, str):
        try:
            data = src.encode("ascii")
        except UnicodeEncodeError as exc:
            raise ParseError("source must be ASCII", 1, exc.start + 1) from None
    else:
        data = bytes(src)
    origin = origin or "<memory>"
    parser = _Parser(tokenize(data))
    fns = parser.program()
    for fn, tok in fns:
        if _depth(fn.body) > MAX_NESTING:
            raise ParseError(f"in {fn.name!r}: nesting too deep", tok.line, tok.column)
    _check(fns)
    functions = tuple(fn for fn, _ in fns)
    return Program(functions, SourceImage(_serialize_functions(functions), origin))


def string_offsets(image: SourceImage) -> list[int]:
    """Image offsets of the first byte inside each string literal, in source order."""
    return [t.offset + 1 for t in tokenize(image.data) if t.kind == "str"]


def parse_file(path) -> Program:
    with open(path, "rb") as f:
        return parse(f.read(), origin=str(path))


# ---------------------------------------------------------------------------
# canonical serializer


def format_expr(e: Expr) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Name):
        return e.name
    if isinstance(e, BinOp):
        prec = PRECEDENCE[e.op]
        left = format_expr(e.left)
        right = format_expr(e.right)
        if isinstance(e.left, BinOp) and PRECEDENCE[e.left.op] < prec:
            left = f"({left})"
        if isinstance(e.right, BinOp) and PRECEDENCE[e.right.op] <= prec:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, HaltCall):
        return f"HALT({format_expr(e.prog)}, {format_expr(e.inp)})"
    if isinstance(e, AddrOf):
        return f"addr_of({e.name})"
    if isinstance(e, Load):
        return f"load({format_expr(e.addr)})"
    if isinstance(e, Arg):
        return f"arg({e.index})"
    raise TypeError(f"not an expression: {e!r}")


def _format_printarg(a) -> str:
    if isinstance(a, StrLit):
        return '"' + a.value.decode("ascii") + '"'
    return format_expr(a)


def _format_block(body, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    for s in body:
        if isinstance(s, Assign):
            out.append(f"{pad}{s.name} = {format_expr(s.expr)};")
        elif isinstance(s, If):
            out.append(f"{pad}if ({format_expr(s.cond)}) {{")
            _format_block(s.then, indent + 1, out)
            if s.orelse is not None:
                out.append(f"{pad}}} else {{")
                _format_block(s.orelse, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, While):
            out.append(f"{pad}while ({format_expr(s.cond)}) {{")
            _format_block(s.body, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, Halt):
            out.append(f"{pad}halt;")
        elif isinstance(s, Print):
            out.append(f"{pad}print {', '.join(_format_printarg(a) for a in s.args)};")
        elif isinstance(s, Return):
            out.append(f"{pad}return {format_expr(s.expr)};")
        else:
            raise TypeError(f"not a statement: {s!r}")


def _format_function(fn: FunctionDef) -> str:
    head = f"fn {fn.name}({', '.join(fn.params)})"
    if fn.locals:
        head += f" var {', '.join(fn.locals)};"
    out = [head + " {"]
    _format_block(fn.body, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"


def _serialize_functions(functions) -> bytes:
    return "\n".join(_format_function(fn) for fn in functions).encode("ascii")


def serialize(p: Program) -> SourceImage:
    return SourceImage(_serialize_functions(p.functions), p.image.origin)


def quote(p: Program) -> Prog:
    return Prog(p.image)


def program_from_functions(functions, origin: str = "<built>") -> Program:
    """Build a Program from AST nodes, validating through the parser."""
    return parse(_serialize_functions(tuple(functions)), origin=origin)
