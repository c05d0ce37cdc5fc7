import csv
import json
from pathlib import Path

import numpy as np
import pytest

from mfdgp import cli
from mfdgp.dgp import default_ladder
from mfdgp import logio

# Cheap declared base costs keep CLI campaigns small: initial design with
# n = 3 costs 45, so a budget of 50 leaves a handful of loop evaluations.
CHEAP_COSTS = "1, 2, 3, 4, 5"


def write_config(path, n=3, budget=50.0, seed=7, out="out", base_costs=CHEAP_COSTS):
    path.write_text(
        "[campaign]\n"
        "objective = forrester5\n"
        f"n = {n}\n"
        "beta = 2.0\n"
        f"budget = {budget}\n"
        f"seed = {seed}\n"
        f"out = {out}\n"
        "[space]\n"
        "lower = 0.0\n"
        "upper = 1.0\n"
        "[fidelity]\n"
        "nominals = 0.0, 0.25, 0.5, 0.75, 1.0\n"
        f"base_costs = {base_costs}\n"
    )


def eval_lines(log_path):
    return [
        line
        for line in Path(log_path).read_text().splitlines()
        if json.loads(line)["type"] == "eval"
    ]


def read_csv_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len({len(r) for r in rows}) == 1  # constant column count
    return rows


# ---------------------------------------------------------------------------
# init
# ---------------------------------------------------------------------------


def test_init_writes_template_and_respects_noclobber(tmp_path):
    target = tmp_path / "c.ini"
    assert cli.main(["init", str(target)]) == 0
    assert target.exists()
    assert cli.main(["init", str(target)]) == cli.EXIT_CONFIG
    assert cli.main(["init", str(target), "--force"]) == 0


def test_init_template_runs_end_to_end(tmp_path, monkeypatch):
    # the shipped template with a tiny budget completes a campaign
    monkeypatch.chdir(tmp_path)
    assert cli.main(["init", "c.ini"]) == 0
    text = Path("c.ini").read_text().replace("budget = 60.0", "budget = 32.0")
    Path("c.ini").write_text(text)
    assert cli.main(["run", "--config", "c.ini", "--out", "tpl-out"]) == 0
    assert (tmp_path / "tpl-out" / "records.jsonl").exists()


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_streams_initial_then_loop_records(tmp_path):
    cfg = tmp_path / "c.ini"
    write_config(cfg, out=str(tmp_path / "out"))
    assert cli.main(["run", "--config", str(cfg)]) == 0
    log_path = tmp_path / "out" / "records.jsonl"
    records = [json.loads(line) for line in eval_lines(log_path)]
    assert len(records) >= 16
    assert all(r["phase"] == "initial-design" for r in records[:15])
    assert records[15]["phase"] == "bo-loop"
    # replay holds the ledger invariants
    state = logio.replay(log_path, default_ladder())
    assert state.budget_spent == pytest.approx(
        sum(r.cost for r in state.records), abs=1e-9
    )
    assert state.incumbent is not None


def test_run_budget_equal_to_initial_design(tmp_path):
    cfg = tmp_path / "c.ini"
    write_config(cfg, n=1, budget=15.0, out=str(tmp_path / "out"))
    assert cli.main(["run", "--config", str(cfg)]) == 0
    records = [json.loads(line) for line in eval_lines(tmp_path / "out" / "records.jsonl")]
    assert len(records) == 5
    assert all(r["phase"] == "initial-design" for r in records)


def test_run_determinism_byte_identical_records(tmp_path):
    cfg_a = tmp_path / "a.ini"
    cfg_b = tmp_path / "b.ini"
    write_config(cfg_a, out=str(tmp_path / "outA"))
    write_config(cfg_b, out=str(tmp_path / "outB"))
    assert cli.main(["run", "--config", str(cfg_a)]) == 0
    assert cli.main(["run", "--config", str(cfg_b)]) == 0
    assert eval_lines(tmp_path / "outA" / "records.jsonl") == eval_lines(
        tmp_path / "outB" / "records.jsonl"
    )


def test_run_rejects_bad_config_before_evaluating(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[campaign]\nobjective = unknown-thing\n")
    assert cli.main(["run", "--config", str(cfg)]) == cli.EXIT_CONFIG
    cfg.write_text("[campaign]\nbudgets = 3\n")
    assert cli.main(["run", "--config", str(cfg)]) == cli.EXIT_CONFIG
    assert cli.main(["run"]) == cli.EXIT_CONFIG  # --config missing


def test_seed_flag_overrides_config(tmp_path):
    cfg = tmp_path / "c.ini"
    write_config(cfg, seed=7, out=str(tmp_path / "o1"))
    assert cli.main(["run", "--config", str(cfg)]) == 0
    write_config(cfg, seed=8, out=str(tmp_path / "o2"))
    assert cli.main(["run", "--config", str(cfg), "--seed", "7"]) == 0
    assert eval_lines(tmp_path / "o1" / "records.jsonl") == eval_lines(
        tmp_path / "o2" / "records.jsonl"
    )


# ---------------------------------------------------------------------------
# resume
# ---------------------------------------------------------------------------


def test_resume_splice_equivalence(tmp_path):
    short_cfg = tmp_path / "short.ini"
    full_cfg = tmp_path / "full.ini"
    write_config(short_cfg, budget=50.0, out=str(tmp_path / "short"))
    write_config(full_cfg, budget=58.0, out=str(tmp_path / "full"))
    assert cli.main(["run", "--config", str(short_cfg)]) == 0
    assert cli.main(
        ["resume", "--log", str(tmp_path / "short" / "records.jsonl"), "--budget", "8.0"]
    ) == 0
    assert cli.main(["run", "--config", str(full_cfg)]) == 0
    assert eval_lines(tmp_path / "short" / "records.jsonl") == eval_lines(
        tmp_path / "full" / "records.jsonl"
    )


def test_resume_zero_budget_is_noop(tmp_path):
    cfg = tmp_path / "c.ini"
    write_config(cfg, out=str(tmp_path / "out"))
    assert cli.main(["run", "--config", str(cfg)]) == 0
    log = tmp_path / "out" / "records.jsonl"
    before = eval_lines(log)
    assert cli.main(["resume", "--log", str(log), "--budget", "0.0"]) == 0
    assert eval_lines(log) == before


def test_resume_truncated_log_exit_4(tmp_path):
    cfg = tmp_path / "c.ini"
    write_config(cfg, out=str(tmp_path / "out"))
    assert cli.main(["run", "--config", str(cfg)]) == 0
    log = tmp_path / "out" / "records.jsonl"
    log.write_text(log.read_text()[:-12])
    assert cli.main(["resume", "--log", str(log), "--budget", "5.0"]) == cli.EXIT_CORRUPT_LOG


# ---------------------------------------------------------------------------
# validate-fidelity
# ---------------------------------------------------------------------------


def test_validate_fidelity_outputs(tmp_path):
    out = tmp_path / "rtd"
    assert cli.main(["validate-fidelity", "--out", str(out), "--seed", "0"]) == 0
    rows = read_csv_rows(out / "fidelity_table.csv")
    assert rows[0] == ["level", "cell_count", "fitted_n", "cost"]
    assert len(rows) == 6
    cells = [int(r[1]) for r in rows[1:]]
    assert cells == sorted(cells) and len(set(cells)) == 5
    ns = [float(r[2]) for r in rows[1:]]
    gaps = [abs(n - ns[-1]) for n in ns]
    for a, b in zip(gaps, gaps[1:]):
        assert b <= a * 1.05
    for level in range(1, 6):
        curve_rows = read_csv_rows(out / f"rtd_level_{level}.csv")
        assert curve_rows[0] == ["theta", "e_theta"]
        data = np.asarray([[float(a), float(b)] for a, b in curve_rows[1:]])
        area = np.trapezoid(data[:, 1], data[:, 0])
        assert area == pytest.approx(1.0, abs=1e-3)


def test_validate_fidelity_requires_reactor_config(tmp_path):
    cfg = tmp_path / "c.ini"
    write_config(cfg)  # forrester objective
    assert cli.main(["validate-fidelity", "--config", str(cfg)]) == cli.EXIT_CONFIG


def test_validate_fidelity_rejects_bad_geometry(tmp_path):
    assert cli.main(
        ["validate-fidelity", "--out", str(tmp_path), "--geometry", "1,2,3"]
    ) == cli.EXIT_CONFIG


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def test_report_outputs_consistent_csvs(tmp_path):
    cfg = tmp_path / "c.ini"
    write_config(cfg, out=str(tmp_path / "out"))
    assert cli.main(["run", "--config", str(cfg)]) == 0
    log = tmp_path / "out" / "records.jsonl"
    assert cli.main(["report", "--log", str(log)]) == 0

    conv = read_csv_rows(tmp_path / "out" / "convergence.csv")
    assert conv[0] == ["iteration", "cumulative_cost", "incumbent_value"]
    incumbents = [float(r[2]) for r in conv[1:]]
    assert all(b >= a for a, b in zip(incumbents, incumbents[1:]))
    costs = [float(r[1]) for r in conv[1:]]
    assert all(b > a for a, b in zip(costs, costs[1:]))

    tl = read_csv_rows(tmp_path / "out" / "fidelity_timeline.csv")
    assert tl[0] == ["iteration", "level", "cost"]
    levels = {int(r[1]) for r in tl[1:]}
    assert levels <= {1, 2, 3, 4, 5}

    n_records = len(eval_lines(log))
    assert len(tl) - 1 == n_records
    summary = (tmp_path / "out" / "report_summary.txt").read_text()
    counts = {
        int(k): int(v)
        for k, v in (
            pair.split(":")
            for pair in summary.splitlines()[3].split(" = ")[1].split(", ")
        )
    }
    assert sum(counts.values()) == n_records


def test_report_corrupt_log_exit_4(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"type": "header", "format": "mfdgp-results", "config": {}}\nnot json\n')
    assert cli.main(["report", "--log", str(bad)]) == cli.EXIT_CORRUPT_LOG
