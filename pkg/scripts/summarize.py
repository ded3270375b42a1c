"""Print the mean-error table (budget x algorithm) of a bench CSV."""

import argparse

from bruelab.bench.csvio import read_bench_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    args = ap.parse_args()
    meta, rows = read_bench_csv(args.csv)
    summary = [r for r in rows if r["row_type"] == "summary"]
    algs = sorted({r["algorithm"] for r in summary})
    budgets = sorted({int(r["budget"]) for r in summary})
    cell = {(r["algorithm"], int(r["budget"])): (float(r["mean_error"]), float(r["std_error"])) for r in summary}
    print(f"# seed {meta.get('seed')}  config {meta.get('config_hash')}")
    print("budget".rjust(8) + "".join(a.rjust(24) for a in algs))
    for b in budgets:
        line = str(b).rjust(8)
        for a in algs:
            m, s = cell[(a, b)]
            line += f"{m:.4f} +- {s:.4f}".rjust(24)
        print(line)


if __name__ == "__main__":
    main()
