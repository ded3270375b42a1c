"""Run the benchmark suite at the acceptance scale and write CSVs under --outdir."""

import argparse
import sys
import time
from pathlib import Path

from bruelab.bench.cli import main as cli

RUNS = {
    "sailing5": ["bench-sailing", "--grid", "5", "--trials", "200"],
    "gametree": ["bench-gametree", "--branching", "2", "--depth", "10", "--trials", "100"],
    "decay": ["sandbox", "--algorithms", "brue,brue-alpha:0.9", "--budgets", "256,512,1024,2048",
              "--trials", "10000"],
    "flat": ["sandbox", "--trials", "10000"],
    "azuma": ["azuma-check"],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(RUNS), help="subset of runs")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or RUNS:
        start = time.perf_counter()
        code = cli(RUNS[name] + ["--seed", str(args.seed), "--jobs", str(args.jobs),
                                 "--out", str(out / f"{name}.csv")])
        print(f"{name}: exit {code} in {time.perf_counter() - start:.1f}s", file=sys.stderr)
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
