"""Rewrite fixtures/ from the GOOD/BAD and demo constructors.

Only run this deliberately: the context-dependent oracle keys on GOOD's exact
bytes, and the tests compare the constructors against these files.
"""
import argparse
from pathlib import Path

from halting_lab.fixtures import fixture_dir, write_fixtures

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=fixture_dir())
    args = ap.parse_args()
    write_fixtures(args.out)
    print(f"wrote fixtures to {args.out}")
