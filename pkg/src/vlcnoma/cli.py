"""Command line front end.

``vlcnoma run --config cfg.toml`` executes one experiment and writes
CSV tables (and PNG figures unless disabled) into the output
directory.  ``vlcnoma check --config cfg.toml`` validates the config
and prints the resolved settings without running anything.

Exit codes: 0 success, 1 every solve in the run was infeasible,
2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import EXPERIMENT_NAMES, ConfigError, load_config
from .experiments import run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlcnoma",
        description="QoS-guaranteed NOMA power allocation simulator for "
                    "indoor optical wireless cells",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment and write results")
    run_p.add_argument("--config", required=True, help="TOML config file")
    run_p.add_argument("--experiment", choices=EXPERIMENT_NAMES,
                       help="override the experiment named in the config")
    run_p.add_argument("--seed", type=int, help="override the random seed")
    run_p.add_argument("--trials", type=int, help="override the trial count")
    run_p.add_argument("--out", help="override the output directory")
    run_p.add_argument("--trace", action="store_true",
                       help="record one solver iteration trace as a CSV")
    run_p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering, write CSVs only")

    check_p = sub.add_parser("check", help="validate a config and print it")
    check_p.add_argument("--config", required=True, help="TOML config file")
    return parser


def _apply_overrides(cfg, args):
    changes = {}
    if args.experiment is not None:
        changes["name"] = args.experiment
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("experiment.seed", "must be nonnegative")
        changes["seed"] = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("experiment.trials", "must be >= 1")
        changes["trials"] = args.trials
    if args.out is not None:
        changes["out_dir"] = args.out
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _print_check(cfg) -> None:
    print(f"experiment: {cfg.name}")
    print(f"trials: {cfg.trials}")
    print(f"seed: {cfg.seed}")
    print(f"out_dir: {cfg.out_dir}")
    print(f"gain_scale: {cfg.noma.gain_scale}")
    print(f"k_users: {cfg.noma.k_users}  k_sweep: {list(cfg.noma.k_sweep)}")
    print(f"tsnr_db: {list(cfg.noma.tsnr_db)}")
    print(f"epsilon: {list(cfg.noma.epsilon)}  "
          f"epsilon_sweep: {list(cfg.noma.epsilon_sweep)}")
    print(f"qos_targets: {list(cfg.noma.qos_targets)}")
    print(f"network: {cfg.network.rows}x{cfg.network.cols} grid, "
          f"spacing {cfg.network.spacing_m} m, {cfg.network.users} users")
    print("config ok")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "check":
            _print_check(cfg)
            return 0
        cfg = _apply_overrides(cfg, args)
        table = run_experiment(cfg, trace=args.trace)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    from . import report

    paths = report.write_result(table, cfg.out_dir)
    if cfg.report.plots and not args.no_plots:
        paths.extend(report.render_figures(table, cfg.out_dir))

    total = table.feasible_solves + table.infeasible_solves
    print(f"experiment {cfg.name}: {table.feasible_solves}/{total} solves "
          f"feasible in {table.runtime_ms / 1e3:.2f} s")
    for path in paths:
        print(f"wrote {path}")
    if table.feasible_solves == 0:
        print("every solve was infeasible under the configured targets",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
