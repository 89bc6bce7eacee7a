"""Halting laboratory: a toy language whose programs are values, a VM with
introspectable call frames, a termination analyzer for its finite-state
fragment, and the HALT oracles that GOOD and BAD are run against."""

from .analyzer import AnalysisLimits, Diverges, Halts, Unknown, analyze
from .lang import ParseError, Program, Prog, SourceImage, parse, quote, serialize
from .machine import CallContext, Machine, Outcome, run
from .oracle import ContextDependent, Stub

__all__ = [
    "AnalysisLimits", "CallContext", "ContextDependent", "Diverges", "Halts",
    "Machine", "Outcome", "ParseError", "Prog", "Program", "SourceImage", "Stub",
    "Unknown", "analyze", "parse", "quote", "run", "serialize",
]
