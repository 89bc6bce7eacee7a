"""In-VM reproductions of two functions whose results depend on the caller.

``mul`` reads its first argument through the caller's frame instead of its
own parameter, so swapping which caller variable holds which value changes
the product. ``mul2`` adds a correction read from a fixed code-image byte;
a print statement *after* the call decides which byte sits there.

Both offsets are derived from the lab's layout rather than hard-coded: the
``mul`` offset is the caller's frame size, the ``mul2`` probe address is
located in the caller's source bytes.
"""
from __future__ import annotations

import difflib
from dataclasses import dataclass, field

from .lang import Program, SourceImage, parse, wrap
from .machine import run
from .oracle import Stub

DEMO_BUDGET = 1_000_000


class FixtureError(Exception):
    pass


@dataclass(frozen=True)
class DemoFixture:
    name: str
    source: SourceImage
    expected_output: tuple[str, ...]
    probe_address: int | None = None

    @property
    def program(self) -> Program:
        return parse(self.source)


@dataclass(frozen=True)
class DemoReport:
    name: str
    passed: bool
    output: tuple[str, ...]
    expected: tuple[str, ...]
    steps: int
    diff: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "steps": self.steps,
            "output": list(self.output),
            "expected": list(self.expected),
            "diff": list(self.diff),
        }


# ---------------------------------------------------------------------------
# mul


def _mul_main(variant: str, x: int, y: int) -> str:
    if variant == "good":
        body = f"  x = {x};\n  y = {y};\n  z = mul(x, y);\n  print x, \"*\", y, \"=\", z;\n"
    elif variant == "bad":
        # same values reach mul, routed through the other variable
        body = f"  x = {y};\n  y = {x};\n  z = mul(y, x);\n  print y, \"*\", x, \"=\", z;\n"
    else:
        raise ValueError(f"variant must be 'good' or 'bad', not {variant!r}")
    return "fn main() var x, y, z; {\n" + body + "}\n"


def _mul_fn(caller_frame_size: int) -> str:
    return (
        "fn mul(xx, yy) var ptr, x; {\n"
        f"  ptr = addr_of(xx) - {caller_frame_size};\n"
        "  x = load(ptr);\n"
        "  print \"First argument is \", xx, \"; second argument is \", yy;\n"
        "  return x * yy;\n"
        "}\n"
    )


def build_mul_demo(variant: str, x: int = 12, y: int = 3) -> DemoFixture:
    main_src = _mul_main(variant, x, y)
    # mul's frame sits right on top of main's, so main's first cell is
    # addr_of(xx) minus main's frame size
    k = parse(main_src + "\n" + _mul_fn(0)).function("main").frame_size
    program = parse(main_src + "\n" + _mul_fn(k), origin=f"mul_{variant}.hl")
    # bad: mul picks up main's first local, which holds y
    product = wrap(x * y) if variant == "good" else wrap(y * y)
    expected = (
        f"First argument is {x}; second argument is {y}",
        f"{x}*{y}={product}",
    )
    return DemoFixture(f"mul_{variant}", program.image, expected)


# ---------------------------------------------------------------------------
# mul2

EQ, SPACE = ord("="), ord(" ")
GOOD2_SEP = "="
BAD2_SEP = " = "


def _mul2_source(separator: str, probe: int) -> str:
    return (
        "fn main() var x, y, z; {\n"
        "  x = 12;\n"
        "  y = 3;\n"
        "  z = mul2(x, y);\n"
        f"  print x, \"*\", y, \"{separator}\", z;\n"
        "}\n"
        "\n"
        "fn mul2(x, y) var z; {\n"
        "  z = x * y;\n"
        f"  z = z + ((load({probe}) & 127) - {EQ});\n"
        "  return z;\n"
        "}\n"
    )


def probe_address() -> int:
    """Image offset of the '=' inside good2's printed separator string."""
    image = parse(_mul2_source(GOOD2_SEP, 0)).image.data
    needle = f'"{GOOD2_SEP}"'.encode()
    if image.count(needle) != 1:
        raise FixtureError("separator literal is not unique in good2")
    addr = image.index(needle) + 1
    # mul2 follows main, so the literal's digits cannot move the probe
    if parse(_mul2_source(GOOD2_SEP, addr)).image.data.index(needle) + 1 != addr:
        raise FixtureError("probe address is not a fixed point")
    return addr


def build_mul2_demo(variant: str, separator: str | None = None) -> DemoFixture:
    if separator is None:
        if variant == "good":
            separator = GOOD2_SEP
        elif variant == "bad":
            separator = BAD2_SEP
        else:
            raise ValueError(f"variant must be 'good' or 'bad', not {variant!r}")
    addr = probe_address()
    program = parse(_mul2_source(separator, addr), origin=f"mul2_{variant}.hl")
    byte = program.image.data[addr]
    if variant == "good" and byte != EQ:
        raise FixtureError(f"good2 probe byte is {byte}, expected {EQ} ('=')")
    if variant == "bad" and separator == BAD2_SEP and byte != SPACE:
        raise FixtureError(f"bad2 probe byte is {byte}, expected {SPACE} (' ')")
    if separator == GOOD2_SEP:
        expected = ("12*3=36",)
    elif separator == BAD2_SEP:
        expected = ("12*3 = 7",)
    else:
        expected = (f"12*3{separator}{36 + ((byte & 127) - EQ)}",)
    return DemoFixture(f"mul2_{variant}", program.image, expected, addr)


# ---------------------------------------------------------------------------


def run_demo(f: DemoFixture, budget: int = DEMO_BUDGET) -> DemoReport:
    # no HALT in the demos; the oracle is never consulted
    out = run(f.program, [], Stub(0), budget)
    passed = out.status == "halted" and out.output == f.expected_output
    diff = ()
    if not passed:
        diff = tuple(difflib.unified_diff(
            list(f.expected_output), list(out.output), "expected", "actual", lineterm=""
        ))
        if out.status != "halted":
            diff += (f"run ended {out.status} ({out.trap_reason})",)
    return DemoReport(f.name, passed, out.output, f.expected_output, out.steps, diff)


def build_demo(name: str, variant: str) -> DemoFixture:
    if name == "mul":
        return build_mul_demo(variant)
    if name == "mul2":
        return build_mul2_demo(variant)
    raise ValueError(f"unknown demo {name!r}")


def all_demos() -> list[DemoFixture]:
    return [build_demo(n, v) for n in ("mul", "mul2") for v in ("good", "bad")]
