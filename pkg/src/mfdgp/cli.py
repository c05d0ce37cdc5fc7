"""Command-line front end: configure, run, resume, validate, report.

Exit codes: 0 success, 2 configuration error, 3 objective or simulation
failure (partial results preserved), 4 corrupt results log.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import campaign, config as cfgmod, dgp, logio
from .errors import (
    CampaignInitError,
    ConfigError,
    CorruptLogError,
    MfdgpError,
    ObjectiveError,
    SimulationDivergedError,
)
from .objectives import reactor
from .streams import TRAIN, derive_seed

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OBJECTIVE = 3
EXIT_CORRUPT_LOG = 4

LOG_NAME = "records.jsonl"


def _write_summary_text(path, state, model_best):
    inc = state.incumbent
    lines = [
        "campaign summary",
        f"budget_spent = {state.budget_spent!r}",
        f"budget_total = {state.budget_total!r}",
        "per_level_counts = "
        + ", ".join(f"{k}:{v}" for k, v in sorted(state.per_level_counts().items())),
    ]
    if state.error:
        lines.append(f"error = {state.error}")
    if inc is not None:
        lines.append(f"incumbent_x = {[float(v) for v in inc.x]!r}")
        lines.append(f"incumbent_y = {inc.y!r}")
    if model_best is not None:
        lines.append(f"model_best = {[float(v) for v in model_best]!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _final_model(state, cfg):
    seed = derive_seed(cfg.seed, TRAIN, state.loop_iterations + 1)
    return campaign._train_from_state(state, dgp.DGPTrainConfig(restarts=4), seed)


def cmd_init(args) -> int:
    path = Path(args.path)
    if path.exists() and not args.force:
        print(f"error: {path} exists (use --force to overwrite)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfgmod.write_template(path)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote configuration template to {path}")
    return EXIT_OK


def _load_config(args) -> cfgmod.CampaignConfig:
    if args.config is None:
        raise ConfigError("--config PATH is required for this command")
    cfg = cfgmod.parse_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.out = args.out
    return cfg.validate()


def cmd_run(args) -> int:
    cfg = _load_config(args)
    objective = cfg.build_objective()
    space = cfg.build_space()
    ladder = cfg.build_ladder()
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / LOG_NAME

    with logio.ResultsLogWriter(log_path, config_payload=cfg.as_payload()) as writer:
        ucb = campaign.UCBConfig(beta=cfg.beta)
        try:
            state = campaign.run(
                objective, space, ladder, cfg.n, ucb, cfg.budget, cfg.seed,
                on_record=writer.record,
            )
        except CampaignInitError as exc:
            writer.error(str(exc))
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_OBJECTIVE
        if state.error:
            writer.error(state.error)
        model_best = None
        if state.incumbent is not None:
            model = _final_model(state, cfg)
            _, model_best = campaign.recommend(state, model, space)
        writer.summary(state, model_best)
    _write_summary_text(out_dir / "summary.txt", state, model_best)
    print(f"run complete: {len(state.records)} evaluations, "
          f"budget {state.budget_spent:g}/{state.budget_total:g}, log at {log_path}")
    return EXIT_OBJECTIVE if state.error else EXIT_OK


def cmd_resume(args) -> int:
    log_path = Path(args.log)
    header = logio.read_header(log_path)
    cfg = cfgmod.CampaignConfig.from_payload(header["config"])
    if args.seed is not None:
        cfg.seed = args.seed
    lines = logio.read_log_lines(log_path)
    totals = [p["budget_total"] for p in lines if p["type"] == "summary"]
    base_total = totals[-1] if totals else cfg.budget
    new_total = base_total + args.budget

    ladder = cfg.build_ladder()
    state = logio.replay(log_path, ladder)
    state.rng_seed = cfg.seed
    objective = cfg.build_objective()
    space = cfg.build_space()

    with logio.ResultsLogWriter(log_path, append=True) as writer:
        ucb = campaign.UCBConfig(beta=cfg.beta)
        state = campaign.continue_run(
            state, objective, space, ucb, new_total, cfg.seed, on_record=writer.record
        )
        if state.error:
            writer.error(state.error)
        model_best = None
        if state.incumbent is not None:
            model = _final_model(state, cfg)
            _, model_best = campaign.recommend(state, model, space)
        writer.summary(state, model_best)
    _write_summary_text(log_path.parent / "summary.txt", state, model_best)
    print(f"resume complete: budget {state.budget_spent:g}/{new_total:g}")
    return EXIT_OBJECTIVE if state.error else EXIT_OK


def cmd_validate_fidelity(args) -> int:
    if args.config is not None:
        cfg = _load_config(args)
        if cfg.objective != "reactor-proxy":
            print("error: validate-fidelity requires the reactor-proxy objective",
                  file=sys.stderr)
            return EXIT_CONFIG
        seed = cfg.seed
        base_costs = cfg.base_costs or reactor.DEFAULT_BASE_COSTS
        out_dir = Path(cfg.out)
    else:
        seed = args.seed if args.seed is not None else 0
        base_costs = reactor.DEFAULT_BASE_COSTS
        out_dir = Path(args.out) if args.out else Path("validate-out")

    try:
        values = [float(v) for v in args.geometry.split(",")]
        if len(values) != 4:
            raise ValueError("expected 4 comma-separated values")
        geom = reactor.ReactorGeometry(
            coil_radius=values[0], tube_radius=values[1],
            pitch=values[2], inversion_fraction=values[3],
        )
    except (ValueError, MfdgpError) as exc:
        print(f"error: bad --geometry: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for level in dgp.default_ladder():
        curve, cost = reactor.reactor_proxy_simulate(
            geom, level, seed=seed, base_cost=base_costs[level.index - 1]
        )
        metric = reactor.fit_tanks_in_series(curve)
        reactor.write_rtd_csv(curve, out_dir / f"rtd_level_{level.index}.csv")
        rows.append(
            (level.index, reactor.cells_for_level(level.index), metric.n_tanks, cost)
        )
    with (out_dir / "fidelity_table.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "cell_count", "fitted_n", "cost"])
        for row in rows:
            writer.writerow([row[0], row[1], repr(row[2]), repr(row[3])])
    print("level  cells  fitted_N      cost")
    for level, cells, n, cost in rows:
        print(f"{level:>5}  {cells:>5}  {n:>8.3f}  {cost:>8.3f}")
    print(f"wrote per-level RTD curves and fidelity_table.csv to {out_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    log_path = Path(args.log)
    header = logio.read_header(log_path)
    cfg = cfgmod.CampaignConfig.from_payload(header["config"])
    state = logio.replay(log_path, cfg.build_ladder())
    out_dir = Path(args.out) if args.out else log_path.parent

    out_dir.mkdir(parents=True, exist_ok=True)
    top = state.top_index
    best = None
    cumulative = 0.0
    with (out_dir / "convergence.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "cumulative_cost", "incumbent_value"])
        for rec in state.records:
            cumulative += rec.cost
            if rec.level.index == top and (best is None or rec.y > best):
                best = rec.y
            if best is not None:
                writer.writerow([rec.iteration, repr(cumulative), repr(best)])
    with (out_dir / "fidelity_timeline.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "level", "cost"])
        for rec in state.records:
            writer.writerow([rec.iteration, rec.level.index, repr(rec.cost)])
    counts = state.per_level_counts()
    lines = [
        "campaign report",
        f"records = {len(state.records)}",
        f"budget_spent = {state.budget_spent!r}",
        "per_level_counts = " + ", ".join(f"{k}:{v}" for k, v in sorted(counts.items())),
    ]
    inc = state.incumbent
    if inc is not None:
        lines.append(f"incumbent_x = {[float(v) for v in inc.x]!r}")
        lines.append(f"incumbent_y = {inc.y!r}")
    (out_dir / "report_summary.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote convergence.csv, fidelity_timeline.csv, report_summary.txt to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="campaign configuration file")
    common.add_argument("--seed", type=int, metavar="INT",
                        help="override the configured random seed")
    common.add_argument("--out", metavar="DIR", help="override the output directory")
    common.add_argument("--force", action="store_true",
                        help="overwrite existing files where applicable")

    parser = argparse.ArgumentParser(
        prog="mfdgp",
        description="Multi-fidelity Bayesian optimization campaigns with a deep GP surrogate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", parents=[common],
                       help="write a commented configuration template")
    p.add_argument("path", help="where to write the template")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("run", parents=[common], help="run a campaign from a config file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("resume", parents=[common],
                       help="continue a finished or interrupted campaign")
    p.add_argument("--log", required=True, metavar="PATH", help="existing results log")
    p.add_argument("--budget", type=float, required=True, metavar="COST",
                   help="extra budget to spend on top of the previous total")
    p.set_defaults(func=cmd_resume)

    p = sub.add_parser("validate-fidelity", parents=[common],
                       help="simulate all reactor fidelities at one geometry")
    p.add_argument("--geometry", default="12.5,2.5,10.0,0.0", metavar="C,T,P,I",
                   help="coil radius, tube radius, pitch, inversion fraction")
    p.set_defaults(func=cmd_validate_fidelity)

    p = sub.add_parser("report", parents=[common],
                       help="emit convergence and fidelity-timeline CSVs from a log")
    p.add_argument("--log", required=True, metavar="PATH", help="results log to analyze")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CorruptLogError as exc:
        print(f"corrupt log: {exc}", file=sys.stderr)
        return EXIT_CORRUPT_LOG
    except (ObjectiveError, SimulationDivergedError, CampaignInitError) as exc:
        print(f"evaluation failure: {exc}", file=sys.stderr)
        return EXIT_OBJECTIVE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
