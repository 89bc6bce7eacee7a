"""Seeded random generator of small HALT-free HL programs.

Most assignments mask their result to a few bits, so most loops either
finish quickly or settle into a short cycle; a minority leave values
unmasked and exercise the analyzer's Unknown path.
"""
from __future__ import annotations

import random

from .lang import (
    Assign, BinOp, Call, FunctionDef, Halt, If, Name, Num, Print, Program,
    Return, StrLit, While, program_from_functions,
)

OPS = ("+", "-", "*", "/", "&", "==", "!=", "<", "<=", ">", ">=", "<<", ">>")
CMP = ("==", "!=", "<", "<=", ">", ">=")


class _Gen:
    def __init__(self, rng: random.Random, variables, callee=None):
        self.rng = rng
        self.variables = variables
        self.callee = callee

    def expr(self, depth: int):
        r = self.rng
        roll = r.random()
        if depth <= 0 or roll < 0.3:
            return Num(r.randint(0, 20)) if r.random() < 0.45 else Name(r.choice(self.variables))
        if self.callee is not None and roll < 0.38:
            return Call(self.callee, (self.expr(depth - 1),))
        return BinOp(r.choice(OPS), self.expr(depth - 1), self.expr(depth - 1))

    def cond(self, depth: int):
        return BinOp(self.rng.choice(CMP), self.expr(depth), self.expr(depth))

    def assign(self, depth: int):
        r = self.rng
        name = r.choice(self.variables)
        e = self.expr(depth)
        if r.random() < 0.85:
            e = BinOp("&", e, Num(r.choice((1, 3, 7, 15, 31))))
        return Assign(name, e)

    def stmt(self, depth: int, in_main: bool):
        r = self.rng
        roll = r.random()
        if depth > 0 and roll < 0.15:
            orelse = self.block(depth - 1, in_main) if r.random() < 0.5 else None
            return If(self.cond(1), self.block(depth - 1, in_main), orelse)
        if depth > 0 and roll < 0.45:
            v = r.choice(self.variables)
            step = Assign(v, BinOp("&", BinOp(r.choice("+-"), Name(v), Num(r.randint(1, 5))),
                                   Num(r.choice((7, 15, 31)))))
            body = self.block(depth - 1, in_main) + (step,)
            return While(BinOp(r.choice(CMP), Name(v), Num(r.randint(0, 20))), body)
        if roll < 0.52:
            return Print((StrLit(b"v="), self.expr(1)))
        if roll < 0.54:
            return Halt() if in_main or r.random() < 0.5 else Return(self.expr(1))
        if roll < 0.55:
            return Return(self.expr(1))
        return self.assign(2)

    def block(self, depth: int, in_main: bool):
        n = self.rng.randint(1, 3)
        return tuple(self.stmt(depth, in_main) for _ in range(n))


def random_program(rng: random.Random, depth: int = 3) -> Program:
    helper = None
    functions = []
    if rng.random() < 0.3:
        g = _Gen(rng, ["u", "v"])
        body = g.block(depth - 1, in_main=False) + (Return(g.expr(2)),)
        helper = FunctionDef("helper", ("u",), ("v",), body)
    g = _Gen(rng, ["a", "b", "c"], callee=helper and helper.name)
    main = FunctionDef("main", (), ("a", "b", "c"), g.block(depth, in_main=True))
    functions.append(main)
    if helper is not None:
        functions.append(helper)
    return program_from_functions(functions, origin="<generated>")


def random_corpus(n: int, seed: int = 0, depth: int = 3) -> list[Program]:
    rng = random.Random(seed)
    return [random_program(rng, depth) for _ in range(n)]
