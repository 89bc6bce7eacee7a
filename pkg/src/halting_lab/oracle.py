"""HALT implementations: constant stubs and the context-dependent oracle."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .analyzer import (
    AnalysisLimits, Diverges, Halts, analyze, ever_executes_halt_intrinsic,
)
from .lang import ParseError, Prog, Value, parse
from .machine import (
    CallContext, Decision, Return, TrapHaltAll, Undecided, decision_label,
)

__all__ = [
    "Stub", "ContextDependent", "Decision", "Return", "TrapHaltAll", "Undecided",
    "MalformedProgram", "decide", "is_context_independent", "ORACLE_NAMES",
]

log = logging.getLogger(__name__)

ORACLE_NAMES = ("const0", "const1", "cdf")


class MalformedProgram(Exception):
    pass


def _log_decision(oracle: str, ctx: CallContext, d: Decision) -> None:
    if log.isEnabledFor(logging.INFO):
        log.info(json.dumps({
            "oracle": oracle,
            "ctx_digest_prefix": ctx.image_digest[:16],
            "frame_chain": list(ctx.frame_chain),
            "decision": decision_label(d),
        }))


@dataclass(frozen=True)
class Stub:
    """The classic proof's HALT: a constant, blind to program, input and caller."""

    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError("Stub bit must be 0 or 1")

    @property
    def name(self) -> str:
        return f"const{self.bit}"

    def decide(self, prog: Value, inp: Value, ctx: CallContext) -> Decision:
        d = Return(self.bit)
        _log_decision(self.name, ctx, d)
        return d


@dataclass(frozen=True)
class ContextDependent:
    """HALT that answers only when called from the top level of GOOD.

    1. Any caller other than GOOD's ``main`` running as the entry point: trap
       the whole machine.
    2. If running ``prog`` on ``inp`` ever executes HALT: return 1.
    3. If the run halts (traps included): return 1.
    4. If the run provably loops: return 0.

    Anything the analyzer cannot settle within ``limits`` is Undecided.
    """

    good_digest: str
    limits: AnalysisLimits = field(default_factory=AnalysisLimits)
    name: str = field(default="cdf", init=False)

    def in_good(self, ctx: CallContext) -> bool:
        return (
            ctx.image_digest == self.good_digest
            and ctx.frame_chain == ("main",)
            and ctx.entry_is_main
        )

    def decide(self, prog: Value, inp: Value, ctx: CallContext) -> Decision:
        d = self._decide(prog, inp, ctx)
        _log_decision(self.name, ctx, d)
        return d

    def _decide(self, prog: Value, inp: Value, ctx: CallContext) -> Decision:
        if not self.in_good(ctx):
            return TrapHaltAll()
        if not isinstance(prog, Prog):
            raise MalformedProgram(f"HALT expects a quoted program, got {prog!r}")
        try:
            p = parse(prog.image)
        except ParseError as exc:
            raise MalformedProgram(str(exc)) from exc
        inputs = [inp]
        calls_halt = ever_executes_halt_intrinsic(p, inputs, self.limits)
        if calls_halt:
            return Return(1)
        if calls_halt is None:
            return Undecided("limits")
        verdict = analyze(p, inputs, limits=self.limits)
        if isinstance(verdict, Halts):
            return Return(1)
        if isinstance(verdict, Diverges):
            return Return(0)
        return Undecided("limits")


def decide(o, prog: Value, inp: Value, ctx: CallContext) -> Decision:
    return o.decide(prog, inp, ctx)


def is_context_independent(o) -> bool:
    return isinstance(o, Stub)
