"""Command-line entry point: ``qpinn-mac train|solve|diagnose --config PATH --out DIR``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ProblemSection, RunConfig, load_config
from .diagnostics import SWEEP_HEADER, run_sweep, summary_dict, trainability_report
from .errors import ConfigurationError, QPinnError, SnapshotVersionError, TrainingDiverged
from .hybrid import init_hybrid
from .problems import uniform_grid
from .training import TRACE_HEADER, max_abs_error, train

log = logging.getLogger("qpinn_mac")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_SNAPSHOT = 4


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpinn-mac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("train", "train a hybrid model on an ODE problem"),
        ("solve", "evaluate a saved model snapshot on a time grid"),
        ("diagnose", "run a gradient-scaling sweep"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides output_dir in the config)")
        p.add_argument("--seed", type=_seed, help="override the config seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _prepare(args, mode: str) -> tuple[RunConfig, Path]:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    cfg.require_for(mode)
    out = args.out or cfg.output_dir
    if out is None:
        raise ConfigurationError("output_dir: give --out or set output_dir in the config")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.model_dump(mode="json"), indent=1) + "\n")
    return cfg, out


def cmd_train(args) -> int:
    cfg, out = _prepare(args, "train")
    problem = cfg.problem.build()
    rng = np.random.default_rng(cfg.seed)
    model = init_hybrid(
        cfg.model.hidden, problem.dim, cfg.model.qnode_config(), rng,
        cfg.model.activation, cfg.model.observable,
    )
    problem_doc = cfg.problem.model_dump()
    try:
        result = train(model, problem, cfg.loss_weights.build(), cfg.train.build(cfg.seed))
    except TrainingDiverged as err:
        io.write_csv(out / "trace.csv", TRACE_HEADER, (r.as_tuple() for r in err.trace))
        if err.last_good_model is not None:
            io.save_snapshot(out / "model.json", err.last_good_model, problem_doc,
                             {"seed": cfg.seed, "diverged_at_epoch": err.epoch})
        print(f"error: {err}; last finite model saved to {out / 'model.json'}", file=sys.stderr)
        return EXIT_NUMERIC

    io.write_csv(out / "trace.csv", TRACE_HEADER, (r.as_tuple() for r in result.trace))
    grid = uniform_grid(problem.t0, problem.t_end, cfg.train.solution_points)
    header, rows = io.solution_table(result.model, grid, problem.analytic)
    io.write_csv(out / "solution.csv", header, rows)
    io.save_snapshot(out / "model.json", result.model, problem_doc, {"seed": cfg.seed})

    loss = result.final_loss
    print(
        f"final loss total={loss.total:.6e} ic={loss.ic:.6e} ode={loss.ode:.6e} "
        f"sol={loss.sol:.6e}{' (skipped)' if loss.sol_skipped else ''}"
    )
    if problem.analytic is not None:
        err = max_abs_error(result.model, problem, cfg.train.solution_points)
        print(f"max abs error vs analytic on {cfg.train.solution_points} points: {err:.6e}")
    print(f"artifacts written to {out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg, out = _prepare(args, "solve")
    snap_path = Path(cfg.solve.snapshot)
    if not snap_path.is_absolute():
        snap_path = Path(args.config).parent / snap_path
    if not snap_path.is_file():
        raise ConfigurationError(f"solve.snapshot: no snapshot file at {snap_path}")
    model, problem_doc = io.load_snapshot(snap_path)
    problem = ProblemSection.model_validate(problem_doc).build() if problem_doc else None
    if problem is None and (cfg.solve.t_start is None or cfg.solve.t_end is None):
        raise ConfigurationError("solve.t_start: snapshot has no problem; give t_start and t_end")
    t_start = cfg.solve.t_start if cfg.solve.t_start is not None else problem.t0
    t_end = cfg.solve.t_end if cfg.solve.t_end is not None else problem.t_end
    grid = uniform_grid(t_start, t_end, cfg.solve.points)
    domain = (problem.t0, problem.t_end) if problem is not None else (t_start, t_end)
    header, rows = io.solution_table(
        model, grid, problem.analytic if problem is not None else None, domain
    )
    io.write_csv(out / "solution.csv", header, rows)
    n_extra = sum(1 for r in rows if r[-1])
    if n_extra:
        print(f"warning: {n_extra} grid points lie outside the training domain {domain}")
    print(f"solution written to {out / 'solution.csv'}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    cfg, out = _prepare(args, "diagnose")
    summary = {"seed": cfg.seed, "eps_grad": cfg.sweep.eps_grad, "reports": {}}
    for scfg in cfg.sweep_configs():
        report = run_sweep(scfg)
        tr = trainability_report(report, scfg.eps_grad)
        io.write_csv(out / f"sweep_{scfg.model_kind}.csv", SWEEP_HEADER, (c.row() for c in report.cells))
        summary["reports"][scfg.model_kind] = summary_dict(report, tr)
        slope = "absent" if report.slope_vs_n is None else f"{report.slope_vs_n:.4f}"
        print(
            f"{scfg.model_kind}: slope_vs_n={slope} trainable={len(tr.trainable_cells)}/"
            f"{len(report.cells)} misclassified={tr.misclassifications}"
        )
    reps = summary["reports"]
    if "mac" in reps and "quantum_only_global" in reps:
        a, b = reps["mac"]["slope_vs_n"], reps["quantum_only_global"]["slope_vs_n"]
        summary["mac_slope_exceeds_global"] = None if a is None or b is None else a > b
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(f"sweep artifacts written to {out}")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "solve": cmd_solve, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SnapshotVersionError as err:
        print(f"snapshot error: {err}", file=sys.stderr)
        return EXIT_SNAPSHOT
    except QPinnError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
