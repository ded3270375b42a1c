import io
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

from bruelab.bench import build_config, run_bench, summarize
from bruelab.bench.cli import main
from bruelab.bench.csvio import read_bench_csv, render_bench
from bruelab.domains import SailingConfig, sailing_mdp
from bruelab.errors import ConfigError


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def sailing_cfg(**kw):
    base = dict(algorithms=["uct"], budgets=[1], trials=1, seed=0, grid=4)
    base.update(kw)
    return build_config("sailing", {}, **base)


def test_one_trial_one_budget_counts():
    cfg = sailing_cfg()
    records = run_bench(cfg)
    assert len(records) == 1 and len(summarize(records)) == 1
    lines = [l for l in render_bench(cfg, records).splitlines() if not l.startswith("#")]
    assert [l.split(",")[0] for l in lines[1:]] == ["detail", "summary"]


def test_budget_one_brue_falls_back_to_uniform():
    records = run_bench(sailing_cfg(algorithms=["brue"], trials=5))
    assert len(records) == 5 and all(r.error >= -1e-9 for r in records)


def test_initial_states_are_paired_and_non_goal():
    cfg = sailing_cfg(algorithms=["uct", "brue", "gct"], budgets=[8, 16], trials=12, seed=4)
    records = run_bench(cfg)
    mdp = sailing_mdp(SailingConfig(4))
    by_trial = {}
    for r in records:
        by_trial.setdefault(r.trial, set()).add(r.initial_state)
        assert not mdp.is_terminal(r.initial_state)
    assert all(len(v) == 1 for v in by_trial.values())
    assert len({next(iter(v)) for v in by_trial.values()}) > 1


def test_summary_means_match_details():
    cfg = sailing_cfg(algorithms=["uct", "brue"], budgets=[16, 64], trials=9, seed=2)
    records = run_bench(cfg)
    for row in summarize(records):
        errs = [r.error for r in records if (r.algorithm, r.budget) == (row.algorithm, row.budget)]
        assert abs(row.mean_error - np.mean(errs)) <= 1e-12
        assert row.count == len(errs)
        assert row.std_error == pytest.approx(np.std(errs, ddof=1) / np.sqrt(len(errs)))


def test_budget_grid_must_increase():
    with pytest.raises(ConfigError):
        sailing_cfg(budgets=[8, 8])
    with pytest.raises(ConfigError):
        sailing_cfg(trials=0)


# --- CLI --------------------------------------------------------------------


def test_bounds_prints_h1_constants():
    code, out, _ = run_cli(["bounds", "--p", "0.5", "--d", "0.3", "--K", "2", "--H", "1"])
    assert code == 0 and out.splitlines()[0] == "c=8 c'=0.1875"


def test_bounds_degenerate_is_config_error():
    code, _, err = run_cli(["bounds", "--p", "0.5", "--d", "0", "--K", "2", "--H", "2"])
    assert code == 2 and "d = 0" in err


def test_bench_sailing_counting(tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run_cli(["bench-sailing", "--grid", "5", "--budgets", "128,256", "--trials", "4",
                          "--algorithms", "uct", "--seed", "1", "--out", str(out)])
    assert code == 0
    meta, rows = read_bench_csv(str(out))
    assert sum(r["row_type"] == "detail" for r in rows) == 8
    assert sum(r["row_type"] == "summary" for r in rows) == 2
    assert {"version", "seed", "config_hash", "config"} <= set(meta)
    assert meta["seed"] == "1"
    assert (tmp_path / "s.csv.timing.csv").exists()
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")


def test_missing_grid_is_usage_error():
    code, _, err = run_cli(["bench-sailing", "--budgets", "1"])
    assert code == 2 and "usage" in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["bench-sailing", "--grid", "4", "--bogus"],
                                  ["bench-sailing", "--grid", "4", "--budgets", "1,x"], []])
def test_bad_usage_exits_2(argv):
    code, _, err = run_cli(argv)
    assert code == 2 and "usage" in err


def test_bad_algorithm_exits_2():
    code, _, err = run_cli(["bench-sailing", "--grid", "4", "--algorithms", "nope"])
    assert code == 2


def test_resource_cap_exits_3():
    code, _, err = run_cli(["bench-gametree", "--branching", "2", "--depth", "23", "--budgets", "4",
                            "--trials", "1", "--algorithms", "uct"])
    assert code == 3 and "cap" in err


def test_config_file_merges_and_flags_win(tmp_path):
    conf = tmp_path / "exp.toml"
    conf.write_text('seed = 5\ntrials = 3\nalgorithms = ["uct", "brue"]\nbudgets = [4, 8]\n'
                    '[sailing]\ngrid_size = 4\ntack_change_penalty = 2.0\n')
    out = tmp_path / "o.csv"
    code, _, _ = run_cli(["bench-sailing", "--config", str(conf), "--trials", "2", "--out", str(out)])
    assert code == 0
    meta, rows = read_bench_csv(str(out))
    assert meta["seed"] == "5"
    assert '"trials":2' in meta["config"] and '"tack_change_penalty":2.0' in meta["config"]
    assert {r["algorithm"] for r in rows} == {"uct", "brue"}


def test_config_file_unknown_key(tmp_path):
    conf = tmp_path / "bad.toml"
    conf.write_text("[sailing]\ngrid_size = 4\nwind = 3\n")
    code, _, err = run_cli(["bench-sailing", "--config", str(conf)])
    assert code == 2 and "wind" in err


def test_depth_one_trees_score_zero(tmp_path):
    out = tmp_path / "g.csv"
    code, _, _ = run_cli(["bench-gametree", "--branching", "3", "--depth", "1", "--budgets", "3,6",
                          "--trials", "10", "--algorithms", "uct", "--out", str(out)])
    assert code == 0
    _, rows = read_bench_csv(str(out))
    assert all(float(r["error"]) == 0.0 for r in rows if r["row_type"] == "detail")


@pytest.mark.parametrize("argv", [
    ["bench-sailing", "--grid", "4", "--budgets", "16,64", "--trials", "5", "--algorithms", "uct,brue,gct"],
    ["bench-gametree", "--branching", "2", "--depth", "5", "--budgets", "8,32", "--trials", "4"],
    ["sandbox", "--trials", "4", "--algorithms", "naive,crafty,brue-alpha:0.9"],
])
def test_serial_parallel_and_repeat_are_byte_identical(tmp_path, argv):
    paths = []
    for k, jobs in enumerate(["1", "1", "2"]):
        path = tmp_path / f"r{k}.csv"
        code, _, _ = run_cli(argv + ["--seed", "7", "--jobs", jobs, "--out", str(path)])
        assert code == 0
        paths.append(path.read_bytes())
    assert paths[0] == paths[1] == paths[2]


def test_azuma_cli(tmp_path):
    out = tmp_path / "az.csv"
    code, _, err = run_cli(["azuma-check", "--trials", "2000", "--h", "1", "--t", "10,50",
                            "--out", str(out), "--seed", "1"])
    assert code == 0 and "0 violations" in err
    text = out.read_text()
    assert "# config_hash:" in text and "analytic_bound" in text
    again = tmp_path / "az2.csv"
    run_cli(["azuma-check", "--trials", "2000", "--h", "1", "--t", "10,50", "--out", str(again),
             "--seed", "1"])
    assert again.read_bytes() == out.read_bytes()


def test_sandbox_default_budgets_are_sweeps(tmp_path):
    out = tmp_path / "x.csv"
    code, _, _ = run_cli(["sandbox", "--trials", "2", "--out", str(out)])
    assert code == 0
    _, rows = read_bench_csv(str(out))
    assert sorted({int(r["budget"]) for r in rows}) == [128 * k for k in range(1, 9)]
