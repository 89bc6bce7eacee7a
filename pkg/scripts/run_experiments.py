"""Print the diagonal outcome for every oracle, the demo outputs and the corpus tally.

    python scripts/run_experiments.py [--json]
"""
import argparse
import json

from halting_lab.cdf_demos import all_demos, run_demo
from halting_lab.diagonal import oracle_by_name, run_diagonal, verify_good_halt_pair
from halting_lab.fixtures import load_corpus
from halting_lab.oracle import ORACLE_NAMES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    diag = [run_diagonal(oracle_by_name(n)).to_json() for n in ORACLE_NAMES]
    demos = [run_demo(f).to_json() for f in all_demos()]
    corpus = verify_good_halt_pair(load_corpus())
    if args.json:
        print(json.dumps({"diagonal": diag, "demos": demos,
                          "corpus": corpus.to_json()}, indent=2))
        return

    print("diagonal")
    for r in diag:
        print(f"  {r['oracle']:7} prediction={r['prediction']} actual={r['actual']}"
              f" contradiction={str(r['contradiction']).lower()}")
    print("demos")
    for d in demos:
        print(f"  {d['name']:10} {'PASS' if d['passed'] else 'FAIL'}  {d['output'][-1]!r}")
    c = corpus.to_json()
    print(f"corpus  passed={c['passed']} failed={c['failed']} undecided={c['undecided']}")


if __name__ == "__main__":
    main()
