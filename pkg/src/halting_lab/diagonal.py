"""GOOD and BAD, and the diagonal experiment run against each oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .analyzer import AnalysisLimits, Diverges, Halts, Unknown, analyze
from .lang import Program, Value, parse, quote
from .machine import HALT_ALL, CallContext, Return, digest, run
from .oracle import ContextDependent, Stub

HALTS_LINE = "Program halts."
FOREVER_LINE = "Program runs forever."

GOOD_SOURCE = f"""\
fn main() var p, i; {{
  p = arg(0);
  i = arg(1);
  if (HALT(p, i) == 1) {{
    print "{HALTS_LINE}";
  }} else {{
    print "{FOREVER_LINE}";
  }}
  halt;
}}
"""

BAD_SOURCE = """\
fn main() var p; {
  p = arg(0);
  if (HALT(p, p) == 0) {
    halt;
  }
  while (1 == 1) {
  }
}
"""

DEFAULT_BUDGET = 1_000_000


def build_good() -> Program:
    return parse(GOOD_SOURCE, origin="good.hl")


def build_bad() -> Program:
    return parse(BAD_SOURCE, origin="bad.hl")


def good_digest() -> str:
    return digest(build_good())


def good_context() -> CallContext:
    """The only context in which the context-dependent oracle answers."""
    return CallContext(good_digest(), ("main",), True)


def cdf_oracle(limits: AnalysisLimits | None = None) -> ContextDependent:
    return ContextDependent(good_digest(), limits or AnalysisLimits())


def oracle_by_name(name: str, limits: AnalysisLimits | None = None):
    if name == "const0":
        return Stub(0)
    if name == "const1":
        return Stub(1)
    if name == "cdf":
        return cdf_oracle(limits)
    raise ValueError(f"unknown oracle {name!r}; expected const0, const1 or cdf")


# ---------------------------------------------------------------------------
# the diagonal experiment

HALTED = "halted"
DIVERGES_PROVEN = "diverges-proven"
TRAPPED_HALT_ALL = "trapped-halt-all"
TRAPPED = "trapped"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class DiagonalReport:
    oracle: str
    prediction: int | None
    actual: str
    contradiction: bool
    steps: int | None = None
    cycle_entry: int | None = None
    cycle_length: int | None = None

    @property
    def expected(self) -> bool:
        """Whether this report is what the argument predicts for its oracle."""
        if self.oracle == "cdf":
            return not self.contradiction and self.prediction == 1
        return self.contradiction

    def to_json(self) -> dict:
        d = {
            "oracle": self.oracle,
            "prediction": self.prediction,
            "actual": self.actual,
            "contradiction": self.contradiction,
        }
        if self.steps is not None:
            d["steps"] = self.steps
        if self.cycle_entry is not None:
            d["cycle_entry"] = self.cycle_entry
            d["cycle_length"] = self.cycle_length
        return d


def _actual(verdict) -> str:
    if isinstance(verdict, Halts):
        if verdict.trap_reason is None:
            return HALTED
        return TRAPPED_HALT_ALL if verdict.trap_reason == HALT_ALL else TRAPPED
    if isinstance(verdict, Diverges):
        return DIVERGES_PROVEN
    return UNKNOWN


def is_contradiction(prediction: int | None, actual: str) -> bool:
    if prediction is None or actual == UNKNOWN:
        return False
    halted = actual != DIVERGES_PROVEN
    return (prediction == 1) != halted


def run_diagonal(oracle, limits: AnalysisLimits | None = None) -> DiagonalReport:
    """Ask ``oracle`` about BAD(BAD) from GOOD's context, then establish what BAD(BAD) does."""
    limits = limits or AnalysisLimits()
    bad = build_bad()
    qbad = quote(bad)
    decision = oracle.decide(qbad, qbad, good_context())
    prediction = decision.bit if isinstance(decision, Return) else None
    verdict = analyze(bad, [qbad], oracle, limits)
    actual = _actual(verdict)
    return DiagonalReport(
        oracle=oracle.name,
        prediction=prediction,
        actual=actual,
        contradiction=is_contradiction(prediction, actual),
        steps=verdict.steps if isinstance(verdict, (Halts, Unknown)) else None,
        cycle_entry=verdict.cycle_entry if isinstance(verdict, Diverges) else None,
        cycle_length=verdict.cycle_length if isinstance(verdict, Diverges) else None,
    )


# ---------------------------------------------------------------------------
# GOOD + HALT over a corpus


@dataclass(frozen=True)
class CaseResult:
    name: str
    truth: str  # "halts" | "diverges" | "unknown"
    answer: str | None  # GOOD's printed line, or None if it printed nothing
    direct: str  # status of P run directly under the cdf oracle
    passed: bool | None  # None when the analyzer gave no definite verdict

    def to_json(self) -> dict:
        return {"name": self.name, "truth": self.truth, "answer": self.answer,
                "direct": self.direct, "passed": self.passed}


@dataclass
class CorpusReport:
    cases: list[CaseResult] = field(default_factory=list)

    @property
    def undecided(self) -> int:
        return sum(c.passed is None for c in self.cases)

    @property
    def failures(self) -> list[CaseResult]:
        return [c for c in self.cases if c.passed is False]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "cases": [c.to_json() for c in self.cases],
            "passed": sum(c.passed is True for c in self.cases),
            "failed": len(self.failures),
            "undecided": self.undecided,
        }


def verify_good_halt_pair(corpus: Iterable[tuple[str, Program, Value]],
                          limits: AnalysisLimits | None = None,
                          budget: int = DEFAULT_BUDGET) -> CorpusReport:
    """Check that GOOD, with the context-dependent HALT, answers each case correctly.

    Ground truth is the analyzer's verdict on P(I). A case passes when GOOD
    prints the matching line and P run directly under the same oracle halts
    exactly when the verdict says so.
    """
    limits = limits or AnalysisLimits()
    oracle = cdf_oracle(limits)
    good = build_good()
    report = CorpusReport()
    for name, p, inp in corpus:
        verdict = analyze(p, [inp], limits=limits)
        truth = {Halts: "halts", Diverges: "diverges"}.get(type(verdict), "unknown")
        g = run(good, [quote(p), inp], oracle, budget)
        answer = g.output[-1] if g.output else None
        direct = run(p, [inp], oracle, budget)
        if truth == "unknown":
            passed = None
        elif truth == "halts":
            passed = answer == HALTS_LINE and g.status == "halted" and direct.halted
        else:
            passed = answer == FOREVER_LINE and g.status == "halted" and not direct.halted
        report.cases.append(CaseResult(name, truth, answer, direct.status, passed))
    return report


def corpus_case(name: str, p: Program, inputs: Sequence[Value] = ()) -> tuple[str, Program, Value]:
    return (name, p, inputs[0] if inputs else 0)
