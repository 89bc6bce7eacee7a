"""Halting analysis by exhaustive single-trace exploration.

HL machines are deterministic, so a run either halts, revisits a
configuration (and therefore loops forever), or outgrows the limits. Every
visited configuration key is stored exactly; a repeat is a proof of
divergence, not a heuristic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .lang import Program, Value
from .machine import (
    DEFAULT_MEMORY_SIZE, HALT_ALL, RUNNING, TRAPPED, CallContext, Machine,
    Oracle, TrapHaltAll,
)


@dataclass(frozen=True)
class AnalysisLimits:
    max_steps: int = 1_000_000
    max_configs: int = 1_000_000

    def __post_init__(self):
        if self.max_steps < 1 or self.max_configs < 1:
            raise ValueError("analysis limits must be >= 1")


class ExecutedHaltMeansHalt:
    """Default model of HALT inside an analysed program: the run stops there.

    Under the context-dependent oracle this is exact. Outside GOOD the call
    traps the whole machine; inside GOOD, GOOD halts whatever bit it gets.
    """

    name = "executed-halt-means-halt"

    def decide(self, prog: Value, inp: Value, ctx: CallContext):
        return TrapHaltAll()


DEFAULT_MODEL = ExecutedHaltMeansHalt()


@dataclass(frozen=True)
class Halts:
    steps: int
    output: tuple[str, ...] = ()
    trap_reason: str | None = None
    states_explored: int = 0

    def to_json(self) -> dict:
        d = {"verdict": "halts", "steps": self.steps,
             "states_explored": self.states_explored, "output": list(self.output)}
        if self.trap_reason is not None:
            d["trap_reason"] = self.trap_reason
        return d


@dataclass(frozen=True)
class Diverges:
    cycle_entry: int
    cycle_length: int
    states_explored: int = 0

    def to_json(self) -> dict:
        return {"verdict": "diverges", "cycle_entry": self.cycle_entry,
                "cycle_length": self.cycle_length, "states_explored": self.states_explored}


@dataclass(frozen=True)
class Unknown:
    states_explored: int
    steps: int = 0

    def to_json(self) -> dict:
        return {"verdict": "unknown", "steps": self.steps, "states_explored": self.states_explored}


Verdict = Halts | Diverges | Unknown


def _explore(p: Program, inputs: Sequence[Value], oracle: Oracle, limits: AnalysisLimits,
             memory_size: int) -> tuple[Verdict, Machine]:
    m = Machine(p, inputs, memory_size)
    seen: dict[tuple, int] = {}
    while True:
        if m.status != RUNNING:
            return Halts(m.step_count, tuple(m.output), m.trap_reason, len(seen)), m
        key = m.config_key()
        first = seen.get(key)
        if first is not None:
            return Diverges(first, m.step_count - first, len(seen)), m
        if m.step_count >= limits.max_steps or len(seen) >= limits.max_configs:
            return Unknown(len(seen), m.step_count), m
        seen[key] = m.step_count
        m.step(oracle)


def analyze(p: Program, inputs: Sequence[Value] = (), oracle_model: Oracle = DEFAULT_MODEL,
            limits: AnalysisLimits = AnalysisLimits(),
            memory_size: int = DEFAULT_MEMORY_SIZE) -> Verdict:
    """Decide whether ``p`` halts on ``inputs``, with ``oracle_model`` answering HALT.

    Traps count as halting. ``Unknown`` means the limits ran out first.
    """
    verdict, _ = _explore(p, inputs, oracle_model, limits, memory_size)
    return verdict


def ever_executes_halt_intrinsic(p: Program, inputs: Sequence[Value] = (),
                                 limits: AnalysisLimits = AnalysisLimits(),
                                 memory_size: int = DEFAULT_MEMORY_SIZE) -> bool | None:
    """True iff the run reaches a HALT call before halting or looping; None if undecided."""
    verdict, m = _explore(p, inputs, DEFAULT_MODEL, limits, memory_size)
    if isinstance(verdict, Unknown):
        return None
    # the default model is the only source of halt-all traps
    return m.status == TRAPPED and m.trap_reason == HALT_ALL


def cycle_witness(p: Program, inputs: Sequence[Value], oracle_model: Oracle, verdict: Diverges,
                  memory_size: int = DEFAULT_MEMORY_SIZE) -> tuple[tuple, tuple]:
    """Replay to the cycle entry and one period later; return both configuration keys."""
    m = Machine(p, inputs, memory_size)
    while m.step_count < verdict.cycle_entry:
        m.step(oracle_model)
    first = m.config_key()
    while m.step_count < verdict.cycle_entry + verdict.cycle_length:
        m.step(oracle_model)
    return first, m.config_key()
