"""Command line entry point: ``ugprofile <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .calibration import calibrate, sweep, write_calibration_csv
from .elicitation import METHODS, ElicitationSession, reduce
from .estimation import estimate, norm_inputs_for_estimation
from .experiments import (
    ExperimentConfig,
    _method_kwargs,
    load_config,
    run_experiment,
    run_seeds,
    write_reports,
)
from .game import run_game, write_population_csv, write_runs_csv


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--seed", type=int, help="master seed (overrides master_seed)")
    p.add_argument("--output-dir", type=Path, help="where CSV/figure files go")
    p.add_argument("--jobs", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ugprofile", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run games and dump every round")
    _common(p)
    p.add_argument("--runs", type=int, default=1)

    p = sub.add_parser("calibrate", help="sweep population parameters against human targets")
    _common(p)
    p.add_argument("--seeds", type=int, help="number of seeds per setting (1..N)")

    for name, help_ in (("estimate", "estimate one proposer's profile"),
                        ("reduce", "run one ambiguity-reduction method on one proposer")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--proposer", type=int, default=0)
        p.add_argument("--m", type=int, default=10, help="observed rounds")
        if name == "reduce":
            p.add_argument("--method", choices=METHODS, default="AR_C")

    p = sub.add_parser("experiment", help="replicate a figure or table")
    p.add_argument("which", choices=("fig2", "fig3", "table2"))
    _common(p)
    p.add_argument("--runs", type=int)
    p.add_argument("--no-plots", action="store_true")
    return parser


def _config(args) -> ExperimentConfig:
    overrides = {"master_seed": args.seed, "output_dir": args.output_dir, "jobs": args.jobs}
    if getattr(args, "runs", None) is not None:
        overrides["n_runs"] = args.runs
    if getattr(args, "seeds", None) is not None:
        overrides["cal_seeds"] = args.seeds
    return load_config(args.config, {k: None if v is None else str(v) for k, v in overrides.items()})


def _single_game(config: ExperimentConfig):
    # Single-case commands use the master seed directly as the game seed.
    return run_game(config.population, config.game, config.master_seed)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _config(args)
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)

        if args.command == "simulate":
            seeds = [config.master_seed] if args.runs == 1 else run_seeds(config.master_seed, args.runs)
            logs = [run_game(config.population, config.game, s) for s in seeds]
            write_runs_csv(logs, out / "runs.csv")
            write_population_csv(logs[0], out / "population.csv")
            print(f"wrote {len(logs)} run(s) to {out / 'runs.csv'}")

        elif args.command == "calibrate":
            settings = sweep(config.cal_mu_di, config.cal_mu_vw, config.population)
            result = calibrate(settings, list(range(1, config.cal_seeds + 1)), config.game, jobs=config.jobs)
            write_calibration_csv(result, out / "calibration.csv")
            b = result.best_params
            print(f"best mu_di={b.mu_di:g} sigma_di={b.sigma_di:g} mu_vw={b.mu_vw:g} "
                  f"sigma_vw={b.sigma_vw:g} nrmse={result.nrmse:.3g}")

        elif args.command == "estimate":
            game = _single_game(config)
            trace = norm_inputs_for_estimation(game, args.proposer, args.m, config.norm_mode)
            sols = estimate(trace, config.grid)
            sols.write_csv(out / "estimate.csv")
            p = game.profile(args.proposer)
            print(f"proposer {args.proposer} true di={p.di:.4g} vw={p.vw:.4g}: "
                  f"{len(sols)} solution(s), fitness {sols.fitness:.6g}, {sols.evaluated} evaluated")

        elif args.command == "reduce":
            game = _single_game(config)
            max_int = config.ss_max_int if args.method == "AR_SS" else config.direct_budget
            session = ElicitationSession.from_log(game, args.proposer, args.m, config.grid,
                                                  config.norm_mode, max_int)
            rep = reduce(session, args.method, **_method_kwargs(config, args.method))
            write_reports(out / "reduction.csv", [(config.master_seed, rep)])
            print(f"{rep.method}: {rep.initial_solutions} -> {rep.final_solutions} solution(s) "
                  f"in {rep.interactions} interaction(s)")

        elif args.command == "experiment":
            res = run_experiment(args.which, config, plots=not args.no_plots)
            for row in res.rows:
                if args.which != "fig2" or row.m in (1, 4, 10, 20):
                    print(f"{row.method:<10} m={row.m:<2} unique={row.pct_unique:5.1f}% "
                          f"solutions={row.mean_solutions:7.2f} interactions={row.mean_interactions:5.2f}")
    except (OSError, ValueError, KeyError) as exc:
        print(f"ugprofile: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
