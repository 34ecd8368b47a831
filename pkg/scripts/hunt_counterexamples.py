#!/usr/bin/env python3
"""Randomized counterexample hunt: unordered strictly positive tuples whose
sampled hypothesis set passes in full while the order conclusion fails.

Zero emitted findings is the expected outcome; the statistics show how the
hypothesis family rejects unordered inputs (immediately, after grid
escalation, or implied by a core comparison beyond the grid).

    python scripts/hunt_counterexamples.py --budget 500 --k 3 --seed 0
"""
import argparse
import json
import sys

from oporder.verify import PGrid, SearchConfig, search_counterexample


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=200)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--dims", default="2,3,4")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p-grid", default="1,1.5,2,4,8")
    ap.add_argument("--findings", default="findings.json")
    args = ap.parse_args()

    config = SearchConfig(
        budget=args.budget,
        k=args.k,
        dims=tuple(int(v) for v in args.dims.split(",")),
        master_seed=args.seed,
        grid=PGrid(values=tuple(float(v) for v in args.p_grid.split(","))),
    )
    report = search_counterexample(config)
    report.write_json(args.findings)
    print(json.dumps(report.stats["counters"], indent=2))
    print(f"wrote {args.findings}")
    if report.findings:
        print("candidate counterexamples emitted; grid passing does not "
              "certify the universal hypothesis", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
