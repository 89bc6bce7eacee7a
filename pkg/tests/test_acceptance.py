"""Exit criteria for the lab, one test per criterion.

Each test records its result in ``RESULTS``; conftest prints one PASS/FAIL
line per criterion at the end of the run.
"""
import json
import time
from contextlib import contextmanager

import pytest

from halting_lab.analyzer import AnalysisLimits, Diverges, Halts, Unknown, analyze, cycle_witness
from halting_lab.cdf_demos import all_demos, build_mul2_demo, build_mul_demo, run_demo
from halting_lab.cli import main as cli_main
from halting_lab.diagonal import (
    FOREVER_LINE, HALTS_LINE, build_bad, build_good, cdf_oracle, good_context,
    run_diagonal, verify_good_halt_pair,
)
from halting_lab.fixtures import fixture_dir, load_corpus
from halting_lab.lang import parse, parse_file, quote
from halting_lab.machine import Return, TrapHaltAll, run
from halting_lab.oracle import Stub
from halting_lab.progen import random_corpus

from reference import contains_halt_call, reference_run

RESULTS: dict[int, tuple[bool, str, str]] = {}


@contextmanager
def criterion(n: int, title: str):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        RESULTS[n] = (False, title, msg)
        raise
    RESULTS[n] = (True, title, f"{time.perf_counter() - t0:.2f}s")


def test_ac1_mul_demo():
    with criterion(1, "mul demo prints 12*3=36 (good) and 12*3=9 (bad), < 1 s"):
        t0 = time.perf_counter()
        good = run_demo(build_mul_demo("good"))
        bad = run_demo(build_mul_demo("bad"))
        elapsed = time.perf_counter() - t0
        assert good.output[-1] == "12*3=36"
        assert bad.output[-1] == "12*3=9"
        assert good.output[0] == bad.output[0] == "First argument is 12; second argument is 3"
        assert good.passed and bad.passed
        assert elapsed < 1.0, f"took {elapsed:.3f}s"


def test_ac2_mul2_demo():
    with criterion(2, "mul2 demo prints 12*3=36 / 12*3 = 7; sources identical through the call, < 1 s"):
        t0 = time.perf_counter()
        good_f, bad_f = build_mul2_demo("good"), build_mul2_demo("bad")
        good, bad = run_demo(good_f), run_demo(bad_f)
        elapsed = time.perf_counter() - t0
        assert good.output == ("12*3=36",)
        assert bad.output == ("12*3 = 7",)
        g, b = good_f.source.data, bad_f.source.data
        call = b"z = mul2(x, y);\n"
        end = g.index(call) + len(call)
        assert b.index(call) + len(call) == end
        assert g[:end] == b[:end]
        assert elapsed < 1.0, f"took {elapsed:.3f}s"


def test_ac3_diagonal_stub_one():
    with criterion(3, "Stub(1): BAD(BAD) proven divergent with cycle witness; contradiction"):
        report = run_diagonal(Stub(1))
        assert report.actual == "diverges-proven"
        assert report.cycle_entry is not None and report.cycle_length > 0
        bad = build_bad()
        a, b = cycle_witness(bad, [quote(bad)], Stub(1),
                             Diverges(report.cycle_entry, report.cycle_length))
        assert a == b
        assert report.prediction == 1 and report.contradiction is True


def test_ac4_diagonal_stub_zero():
    with criterion(4, "Stub(0): BAD(BAD) halts within 10^4 steps; contradiction"):
        bad = build_bad()
        out = run(bad, [quote(bad)], Stub(0), 10**4)
        assert out.status == "halted" and out.steps <= 10**4
        report = run_diagonal(Stub(0))
        assert report.prediction == 0 and report.actual == "halted"
        assert report.contradiction is True


def test_ac5_diagonal_cdf():
    with criterion(5, "cdf: BAD(BAD) traps halt-all within 10^4 steps; GOOD gets 1; no contradiction"):
        bad = build_bad()
        cdf = cdf_oracle()
        out = run(bad, [quote(bad)], cdf, 10**4)
        assert (out.status, out.trap_reason) == ("trapped", "halt-all")
        assert out.steps <= 10**4
        assert cdf.decide(quote(bad), quote(bad), good_context()) == Return(1)
        report = run_diagonal(cdf)
        assert report.prediction == 1 and report.contradiction is False


def test_ac6_good_halt_corpus():
    with criterion(6, "GOOD+HALT verify-corpus 100% on >= 20 pinned programs, < 60 s"):
        t0 = time.perf_counter()
        cases = load_corpus()
        names = {name for name, _, _ in cases}
        assert len(cases) >= 20
        assert {"bad_on_bad", "reachable_halt", "dead_halt_loop"} <= names
        report = verify_good_halt_pair(cases)
        elapsed = time.perf_counter() - t0
        assert report.undecided == 0
        assert not report.failures, [c.name for c in report.failures]
        by_name = {c.name: c for c in report.cases}
        assert by_name["dead_halt_loop"].answer == FOREVER_LINE
        assert by_name["reachable_halt"].answer == HALTS_LINE
        assert by_name["bad_on_bad"].answer == HALTS_LINE
        truths = {c.truth for c in report.cases}
        assert truths == {"halts", "diverges"}
        assert elapsed < 60, f"took {elapsed:.1f}s"


@pytest.mark.slow
def test_ac7_analyzer_vs_direct_execution():
    with criterion(7, "1,000 generated HALT-free programs: zero analyzer/execution contradictions, < 5 min"):
        t0 = time.perf_counter()
        limits = AnalysisLimits(max_steps=10**5, max_configs=10**5)
        programs = random_corpus(1000, seed=20241015)
        counts = {"halts": 0, "diverges": 0, "unknown": 0}
        contradictions = []
        for i, p in enumerate(programs):
            assert not contains_halt_call(p)
            v = analyze(p, [], limits=limits)
            status, output = reference_run(p, [], max_steps=10**5)
            if isinstance(v, Halts):
                counts["halts"] += 1
                if status == "budget" or tuple(output) != v.output:
                    contradictions.append((i, "halts", status))
            elif isinstance(v, Diverges):
                counts["diverges"] += 1
                a, b = cycle_witness(p, [], Stub(0), v)
                if a != b or status != "budget":
                    contradictions.append((i, "diverges", status))
            else:
                assert isinstance(v, Unknown)
                counts["unknown"] += 1
        elapsed = time.perf_counter() - t0
        assert not contradictions, contradictions[:5]
        assert counts["halts"] > 0 and counts["diverges"] > 0, counts
        assert elapsed < 300, f"took {elapsed:.1f}s"


def _fixture_runs():
    root = fixture_dir()
    bad = build_bad()
    runs = [
        ("good.hl", parse_file(root / "good.hl"), [quote(bad), quote(bad)]),
        ("bad.hl", parse_file(root / "bad.hl"), [quote(bad)]),
        ("large_counter.hl", parse_file(root / "large_counter.hl"), []),
    ]
    runs += [(f"cdf/{f.name}.hl", parse_file(root / "cdf" / f"{f.name}.hl"), []) for f in all_demos()]
    runs += [(f"corpus/{name}", p, [inp]) for name, p, inp in load_corpus()]
    return runs


def _payload(p, inputs):
    limits = AnalysisLimits(10**5, 10**5)
    out = run(p, inputs, cdf_oracle(limits), 10**5)
    verdict = analyze(p, inputs, limits=limits)
    return json.dumps({"run": out.to_json(), "analyze": verdict.to_json()})


def test_ac8_determinism(capsys):
    with criterion(8, "every fixture run twice gives bit-identical JSON, no timestamps"):
        for name, p, inputs in _fixture_runs():
            a, b = _payload(p, inputs), _payload(p, inputs)
            assert a == b, name
            assert "time" not in a
        for argv in (["diagonal", "--oracle", "cdf", "--json"],
                     ["demo", "mul", "--json"],
                     ["verify-corpus", "--json"]):
            outs = []
            for _ in range(2):
                cli_main(argv)
                outs.append(capsys.readouterr().out)
            assert outs[0] == outs[1], argv
            assert "time" not in outs[0]


class _Recorder:
    """Wraps an oracle and keeps every context it is consulted from."""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.contexts = []

    def decide(self, prog, inp, ctx):
        self.contexts.append(ctx)
        return self.inner.decide(prog, inp, ctx)


def test_ac9_context_blindness_vs_sensitivity():
    with criterion(9, "stubs context-blind over >= 3 contexts; cdf answers only from GOOD at entry"):
        halt_prog = parse("fn main() { halt; }")
        rec = _Recorder(Stub(0))
        for _, p, inp in load_corpus():
            run(p, [inp], rec, 10**4)
        good_sub = parse("fn main() var r; { r = good(); }\n"
                         + build_good().image.text().replace("fn main()", "fn good()"))
        run(good_sub, [quote(halt_prog), 0], rec, 10**4)
        run(build_good(), [quote(halt_prog), 0], rec, 10**4)
        contexts = list(dict.fromkeys(rec.contexts))
        assert len(contexts) >= 3

        q = quote(halt_prog)
        for bit in (0, 1):
            decisions = {Stub(bit).decide(q, 0, c) for c in contexts}
            assert decisions == {Return(bit)}

        cdf = cdf_oracle()
        good_ctx = good_context()
        assert good_ctx in contexts
        for c in contexts:
            d = cdf.decide(q, 0, c)
            if c == good_ctx:
                assert isinstance(d, Return)
            else:
                assert d == TrapHaltAll(), c
        assert sum(c != good_ctx for c in contexts) >= 3
