"""Pinned fixture files: GOOD/BAD, the CDF demos, and the verification corpus.

Layout under the fixture directory::

    good.hl, bad.hl, manifest.json          # sha256 of each image
    cdf/<demo>.hl, cdf/manifest.json        # digest, expected output, probe address
    corpus/*.hl, corpus/manifest.json       # cases: name, file, input
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from . import cdf_demos, diagonal
from .lang import parse_file, quote
from .machine import DIGEST_ALGORITHM, digest

ENV_VAR = "HLAB_FIXTURES"


def fixture_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    repo = Path(__file__).resolve().parents[2] / "fixtures"
    return repo if repo.is_dir() else Path.cwd() / "fixtures"


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def write_fixtures(root: Path) -> None:
    """Regenerate the constructor-built fixtures and their digest manifests."""
    root.mkdir(parents=True, exist_ok=True)
    manifest = {"digest": DIGEST_ALGORITHM, "files": {}}
    for name, p in (("good.hl", diagonal.build_good()), ("bad.hl", diagonal.build_bad())):
        (root / name).write_bytes(p.image.data)
        manifest["files"][name] = digest(p)
    _dump(root / "manifest.json", manifest)

    cdf = root / "cdf"
    cdf.mkdir(exist_ok=True)
    demos = {"digest": DIGEST_ALGORITHM, "demos": {}}
    for f in cdf_demos.all_demos():
        (cdf / f"{f.name}.hl").write_bytes(f.source.data)
        entry = {"file": f"{f.name}.hl", "sha256": digest(f.source),
                 "expected_output": list(f.expected_output)}
        if f.probe_address is not None:
            entry["probe_address"] = f.probe_address
        demos["demos"][f.name] = entry
    _dump(cdf / "manifest.json", demos)


def load_manifest(path: Path) -> dict:
    return json.loads(Path(path).read_text())


def parse_input(token: str, base: Path | None = None):
    """An input token: a decimal Int, or ``@file.hl`` for a quoted program."""
    if token.startswith("@"):
        path = Path(token[1:])
        if base is not None and not path.is_absolute():
            path = base / path
        return quote(parse_file(path))
    return int(token)


def load_corpus(manifest_path: Path | None = None) -> list[tuple]:
    """Corpus cases as (name, Program, input) triples."""
    if manifest_path is None:
        manifest_path = fixture_dir() / "corpus" / "manifest.json"
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    cases = []
    for case in load_manifest(manifest_path)["cases"]:
        p = parse_file(base / case["file"])
        inp = case.get("input", "0")
        cases.append((case["name"], p, parse_input(str(inp), base)))
    return cases
