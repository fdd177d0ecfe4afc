"""Fitting population parameters to human Ultimatum Game statistics.

Each candidate setting is simulated over a range of seeds, the per-round
performance measures are averaged across seeds, and only then scored against
the human targets with a normalized RMSE.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .game import PopulationParams, RunLog, run_game
from .model import GameConfig, value_demand
from .report import write_rows


@dataclass(frozen=True)
class PerformanceMeasures:
    mu_d: float
    sigma_d: float
    mu_a: float
    sigma_a: float
    sigma_vd: float


# Human data, rounds 1 and 10 (sigma_vd is postulated, not measured).
EMPIRICAL_TARGETS: dict[int, PerformanceMeasures] = {
    1: PerformanceMeasures(561.8, 128.9, 0.806, 0.40, 128.9),
    10: PerformanceMeasures(584.2, 98.66, 0.868, 0.34, 122.5),
}


@dataclass(frozen=True)
class CalibrationRow:
    params: PopulationParams
    nrmse: float
    measures: dict[int, PerformanceMeasures]


@dataclass(frozen=True)
class CalibrationResult:
    best_params: PopulationParams
    nrmse: float
    table: tuple[CalibrationRow, ...]


def measure(log: RunLog, round_: int) -> PerformanceMeasures:
    records = log.round_records(round_)
    if not records:
        raise ValueError(f"round {round_} is not in the log (1..{log.config.rounds})")
    demands = np.array([r.demand for r in records], dtype=float)
    accepted = np.array([r.accepted for r in records], dtype=float)
    vd = np.array([value_demand(a.profile.di, log.config.pie) for a in log.proposers], dtype=float)
    return PerformanceMeasures(
        mu_d=float(demands.mean()),
        sigma_d=float(demands.std()),
        mu_a=float(accepted.mean()),
        sigma_a=float(accepted.std()),
        sigma_vd=float(vd.std()),
    )


def average_measures(items: Sequence[PerformanceMeasures]) -> PerformanceMeasures:
    arr = np.array([astuple(m) for m in items], dtype=float)
    return PerformanceMeasures(*(float(x) for x in arr.mean(axis=0)))


def nrmse(measured: Mapping[int, PerformanceMeasures],
          targets: Mapping[int, PerformanceMeasures] = EMPIRICAL_TARGETS) -> float:
    """Root mean square of target-relative errors over all measures, in percent."""
    errors = []
    for k, target in targets.items():
        if k not in measured:
            raise ValueError(f"round {k} missing from measured values")
        for f in fields(PerformanceMeasures):
            t = getattr(target, f.name)
            errors.append((getattr(measured[k], f.name) - t) / t)
    return 100.0 * float(np.sqrt(np.mean(np.square(errors))))


def score_setting(per_seed: Sequence[Mapping[int, PerformanceMeasures]],
                  targets: Mapping[int, PerformanceMeasures] = EMPIRICAL_TARGETS,
                  ) -> tuple[dict[int, PerformanceMeasures], float]:
    """Average measures across seeds first, then score the averages."""
    averaged = {k: average_measures([s[k] for s in per_seed]) for k in targets}
    return averaged, nrmse(averaged, targets)


def _simulate_setting(args) -> list[dict[int, PerformanceMeasures]]:
    params, seeds, config, rounds = args
    out = []
    for s in seeds:
        log = run_game(params, config, s)
        out.append({k: measure(log, k) for k in rounds})
    return out


def sweep(mu_di: Iterable[float], mu_vw: Iterable[float], base: PopulationParams = PopulationParams(),
          sigma_di: Iterable[float] | None = None, sigma_vw: Iterable[float] | None = None,
          ) -> list[PopulationParams]:
    """Cartesian grid of settings; sigmas default to the base values."""
    sd = list(sigma_di) if sigma_di is not None else [base.sigma_di]
    sv = list(sigma_vw) if sigma_vw is not None else [base.sigma_vw]
    return [replace(base, mu_di=float(a), sigma_di=float(b), mu_vw=float(c), sigma_vw=float(d))
            for a in mu_di for b in sd for c in mu_vw for d in sv]


def calibrate(settings: Sequence[PopulationParams], seeds: Sequence[int], config: GameConfig = GameConfig(),
              targets: Mapping[int, PerformanceMeasures] = EMPIRICAL_TARGETS, jobs: int = 1,
              ) -> CalibrationResult:
    if not settings or not seeds:
        raise ValueError("calibration needs at least one setting and one seed")
    rounds = sorted(targets)
    if rounds[-1] > config.rounds:
        raise ValueError(f"targets need round {rounds[-1]} but the game has {config.rounds}")
    tasks = [(p, list(seeds), config, rounds) for p in settings]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_simulate_setting, tasks))
    else:
        results = [_simulate_setting(t) for t in tasks]

    table = []
    for params, per_seed in zip(settings, results):
        averaged, score = score_setting(per_seed, targets)
        table.append(CalibrationRow(params, score, averaged))
    best = min(table, key=lambda r: r.nrmse)
    return CalibrationResult(best.params, best.nrmse, tuple(table))


def write_calibration_csv(result: CalibrationResult, path: Path) -> None:
    names = [f.name for f in fields(PerformanceMeasures)]
    rounds = sorted(result.table[0].measures)
    header = ["mu_di", "sigma_di", "mu_vw", "sigma_vw", "nrmse"]
    header += [f"{n}_r{k}" for k in rounds for n in names] + ["best"]
    rows = []
    for row in result.table:
        p = row.params
        vals = [p.mu_di, p.sigma_di, p.mu_vw, p.sigma_vw, row.nrmse]
        vals += [getattr(row.measures[k], n) for k in rounds for n in names]
        rows.append(vals + [int(row.params == result.best_params and row.nrmse == result.nrmse)])
    write_rows(path, header, rows)
