"""Command-line entry point: ``bruelab <subcommand> [flags]``.

Exit codes: 0 success, 2 configuration or usage error, 3 resource cap hit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Optional

from ..errors import ConfigError, DegenerateInstanceError, ResourceCapError
from ..theory import AzumaGrid, azuma_grid, lemma1_constants, naive_crafty_bounds, theorem1_constants
from .config import build_config, load_toml, powers_of_two
from .csvio import render_bench, render_rows, render_timing, repo_version, timing_path, write_text
from .runner import run_bench

SAILING_ALGORITHMS = ["uct", "gct:0.5", "brue", "brue-per-alpha:0.9"]
GAMETREE_ALGORITHMS = ["uct", "brue"]
SANDBOX_ALGORITHMS = ["naive", "crafty"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so main() owns the exit code
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file; command-line flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV path (default: standard output)")
    p.add_argument("--jobs", type=int)


def _bench_flags(p: argparse.ArgumentParser) -> None:
    _common(p)
    p.add_argument("--budgets", type=int_list, help="comma-separated iteration counts")
    p.add_argument("--algorithms", type=str_list, help="comma-separated planner specs")
    p.add_argument("--trials", type=int)


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bruelab", description="Simple-regret MCTS planners and benchmarks.")
    ap.add_argument("--version", action="version", version=repo_version())
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("bench-sailing", help="sailing-domain error vs budget")
    _bench_flags(p)
    p.add_argument("--grid", type=int, help="grid side length (required unless in --config)")

    p = sub.add_parser("bench-gametree", help="random min-max tree error vs budget")
    _bench_flags(p)
    p.add_argument("--branching", type=int)
    p.add_argument("--depth", type=int)

    p = sub.add_parser("sandbox", help="flat-policy NaiveUniform vs CraftyUniform on a tiny MDP")
    _bench_flags(p)

    p = sub.add_parser("bounds", help="analytic bound constants")
    _common(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--H", type=int, required=True)
    p.add_argument("--B", type=int, help="also print flat-policy bounds (needs --n)")
    p.add_argument("--n", type=int)
    p.add_argument("--levels", action="store_true", help="print per-level constants")

    p = sub.add_parser("azuma-check", help="empirical tails vs concentration bounds")
    _common(p)
    p.add_argument("--h", type=float_list, help="support bounds (default 1,2)")
    p.add_argument("--delta-fracs", type=float_list, help="deviation as a fraction of h")
    p.add_argument("--c-e", type=float_list)
    p.add_argument("--c-p", type=float_list)
    p.add_argument("--alphas", type=float_list)
    p.add_argument("--t", type=int_list, help="sample counts")
    p.add_argument("--trials", type=int)
    return ap


def _bench(args, domain: str) -> int:
    file = load_toml(args.config)
    defaults = {"sailing": (SAILING_ALGORITHMS, powers_of_two(7, 15)),
                "gametree": (GAMETREE_ALGORITHMS, powers_of_two(6, 14)),
                "sandbox": (SANDBOX_ALGORITHMS, None)}[domain]
    cfg = build_config(domain, file, algorithms=args.algorithms, budgets=args.budgets,
                       trials=args.trials, seed=args.seed, out=args.out, jobs=args.jobs,
                       grid=getattr(args, "grid", None), branching=getattr(args, "branching", None),
                       depth=getattr(args, "depth", None), default_algorithms=defaults[0],
                       default_budgets=defaults[1])
    records = run_bench(cfg)
    write_text(render_bench(cfg, records), cfg.out)
    if cfg.out not in (None, "-"):
        write_text(render_timing(records), timing_path(cfg.out))
    return 0


def _bounds(args) -> int:
    bc = theorem1_constants(args.p, args.d, args.K, args.H)
    print(f"c={bc.c:.10g} c'={bc.c_prime:.10g}")
    print(f"log_c={bc.log_c:.10g} log_c_prime={bc.log_c_prime:.10g} transition_n={bc.transition_n:.10g}")
    if args.levels:
        lv = lemma1_constants(args.p, args.d, args.K, args.H)
        for h, (lc, lcp) in enumerate(zip(lv["log_c_h"], lv["log_c_h_prime"]), start=1):
            print(f"h={h} log_c_h={lc:.10g} log_c_h_prime={lcp:.10g}")
        print(f"log_c1_prime_basis={lv['log_c1_prime_basis']:.10g}")
    if args.B is not None:
        if args.n is None:
            raise ConfigError("--B needs --n")
        fb = naive_crafty_bounds(args.K, args.B, args.H, args.d, args.n)
        print(f"naive={fb.naive:.10g} crafty={fb.crafty:.10g} crafty_threshold={fb.crafty_threshold:.10g}")
    return 0


AZUMA_COLUMNS = ["h", "delta", "c_p", "c_e", "alpha", "t", "trials", "hits", "empirical_tail",
                 "ci_lower", "ci_upper", "analytic_bound", "violation"]


def _azuma(args) -> int:
    file = load_toml(args.config)
    raw = dict(file.get("azuma", {}))
    grid = AzumaGrid()
    for attr, flag in (("hs", args.h), ("delta_fracs", args.delta_fracs), ("c_es", args.c_e),
                       ("c_ps", args.c_p), ("alphas", args.alphas), ("t_grid", args.t),
                       ("trials", args.trials), ("seed", args.seed)):
        value = flag if flag is not None else raw.pop(attr, None)
        if value is None and attr == "seed":
            value = file.get("seed")
        if value is not None:
            setattr(grid, attr, value)
    unknown = set(raw) - {"hs", "delta_fracs", "c_es", "c_ps", "alphas", "t_grid", "trials", "seed"}
    if unknown:
        raise ConfigError(f"unknown keys in [azuma]: {', '.join(sorted(unknown))}")
    rows = azuma_grid(grid)
    resolved = json.dumps({k: (list(v) if isinstance(v, (list, tuple)) else v)
                           for k, v in vars(grid).items() if k != "extra"},
                          sort_keys=True, separators=(",", ":"))
    meta = {"version": repo_version(), "seed": grid.seed,
            "config_hash": hashlib.sha256(resolved.encode("utf-8")).hexdigest()[:16],
            "config": resolved}
    write_text(render_rows(meta, AZUMA_COLUMNS, [r.as_dict() for r in rows]),
               args.out or file.get("out"))
    bad = sum(r.violation for r in rows)
    print(f"azuma-check: {len(rows)} rows, {bad} violations", file=sys.stderr)
    return 0


def main(argv: Optional[list] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    try:
        if args.command == "bounds":
            return _bounds(args)
        if args.command == "azuma-check":
            return _azuma(args)
        domain = {"bench-sailing": "sailing", "bench-gametree": "gametree", "sandbox": "sandbox"}[args.command]
        return _bench(args, domain)
    except ResourceCapError as exc:
        print(f"bruelab: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, DegenerateInstanceError) as exc:
        print(f"bruelab: {exc}", file=sys.stderr)
        if args.command == "bench-sailing" and "grid" in str(exc):
            print(parser.format_usage(), file=sys.stderr, end="")
        return 2


if __name__ == "__main__":
    sys.exit(main())
