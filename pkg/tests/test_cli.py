import json
import subprocess
import sys
from pathlib import Path

import pytest

from halting_lab.cli import main
from halting_lab.fixtures import fixture_dir

FIX = fixture_dir()
BAD = str(FIX / "bad.hl")
GOOD = str(FIX / "good.hl")
CORPUS = FIX / "corpus"


def hlab(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_run_bad_on_bad_traps(capsys):
    code, out = hlab(capsys, "run", BAD, "--input", f"@{BAD}", "--oracle", "cdf", "--json")
    assert code == 2
    assert json.loads(out) == {"status": "trapped", "steps": 5, "output": [], "trap_reason": "halt-all"}


def test_run_good_on_bad(capsys):
    code, out = hlab(capsys, "run", GOOD, "--input", f"@{BAD}", "--input", f"@{BAD}", "--oracle", "cdf")
    assert code == 0
    assert out.splitlines()[0] == "Program halts."


def test_run_budget_exhaustion(capsys):
    code, out = hlab(capsys, "run", CORPUS / "while_true.hl", "--budget", "50", "--json")
    assert code == 3 and json.loads(out)["status"] == "diverged-budget"


def test_run_usage_errors(capsys, tmp_path):
    assert main(["run", "missing.hl"]) == 1
    broken = tmp_path / "broken.hl"
    broken.write_text("fn main() { halt }")
    assert main(["run", str(broken)]) == 1
    assert main(["run", GOOD, "--input", "twelve"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["run", GOOD, "--oracle", "magic"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["run", GOOD, "--budget", "0"])
    assert exc.value.code == 1


def test_analyze_exit_codes(capsys):
    code, out = hlab(capsys, "analyze", CORPUS / "while_true.hl")
    assert code == 4 and json.loads(out)["verdict"] == "diverges"
    code, out = hlab(capsys, "analyze", CORPUS / "halt.hl")
    assert code == 0 and json.loads(out)["verdict"] == "halts"
    code, out = hlab(capsys, "analyze", FIX / "large_counter.hl", "--max-configs", "1000")
    assert code == 5 and json.loads(out) == {"verdict": "unknown", "steps": 1000, "states_explored": 1000}


@pytest.mark.parametrize(
    "oracle, contradiction", [("const1", True), ("const0", True), ("cdf", False)]
)
def test_diagonal(capsys, oracle, contradiction):
    code, out = hlab(capsys, "diagonal", "--oracle", oracle, "--json")
    assert code == 0
    report = json.loads(out)
    assert report["contradiction"] is contradiction
    assert list(report)[:4] == ["oracle", "prediction", "actual", "contradiction"]


def test_diagonal_text(capsys):
    code, out = hlab(capsys, "diagonal", "--oracle", "cdf")
    assert code == 0
    assert out.strip() == "oracle=cdf prediction=1 actual=trapped-halt-all contradiction=false"


@pytest.mark.parametrize("name", ["mul", "mul2"])
def test_demo(capsys, name):
    code, out = hlab(capsys, "demo", name, "--json")
    assert code == 0
    demos = json.loads(out)["demos"]
    assert [d["passed"] for d in demos] == [True, True]


def test_demo_variant_text(capsys):
    code, out = hlab(capsys, "demo", "mul2", "--variant", "bad")
    assert code == 0
    assert out.splitlines() == ["[PASS] mul2_bad", "  12*3 = 7"]


def test_verify_corpus(capsys):
    code, out = hlab(capsys, "verify-corpus", "--json")
    report = json.loads(out)
    assert code == 0 and report["failed"] == 0 and report["passed"] >= 20


def test_verify_corpus_mismatch_exit(capsys, tmp_path):
    (tmp_path / "p.hl").write_text("fn main() { while (1 == 1) { } }")
    (tmp_path / "manifest.json").write_text(json.dumps({"cases": [{"name": "p", "file": "p.hl"}]}))
    # enough steps to prove the 5-step cycle, too few for GOOD to print its answer
    code, _ = hlab(capsys, "verify-corpus", tmp_path / "manifest.json", "--budget", "8")
    assert code == 6


def test_fixture_dir_env_override(capsys, tmp_path, monkeypatch):
    (tmp_path / "corpus").mkdir()
    (tmp_path / "corpus" / "h.hl").write_text("fn main() { halt; }")
    (tmp_path / "corpus" / "manifest.json").write_text(
        json.dumps({"cases": [{"name": "h", "file": "h.hl", "input": 0}]}))
    monkeypatch.setenv("HLAB_FIXTURES", str(tmp_path))
    code, out = hlab(capsys, "verify-corpus", "--json")
    assert code == 0 and [c["name"] for c in json.loads(out)["cases"]] == ["h"]


def test_json_is_stable(capsys):
    outs = [hlab(capsys, "diagonal", "--oracle", "const1", "--json")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "halting_lab.cli", "diagonal", "--oracle", "const0", "--json"],
        capture_output=True, text=True, cwd=Path(__file__).parent.parent,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["contradiction"] is True
