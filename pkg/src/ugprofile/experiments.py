"""Batch experiments: estimation precision/ambiguity and ambiguity reduction.

Every (run, proposer, m) triple is one case. A case is estimated from the
first m rounds; ambiguous cases are then handed to each reduction method.
Per-case rows are aggregated per (method, m).
"""

from __future__ import annotations

import configparser
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .elicitation import METHODS, ElicitationSession, ReductionReport, reduce
from .estimation import (
    NORM_MODES,
    GridSpec,
    ObservationTrace,
    SolutionSet,
    norm_inputs_for_estimation,
    prefix_estimates,
)
from .game import PopulationParams, run_game
from .model import GameConfig, value_demand
from .report import write_dataclasses, write_rows

log = logging.getLogger(__name__)

BASELINE = "ESTIMATION"


@dataclass(frozen=True)
class ExperimentConfig:
    n_runs: int = 100
    rounds_range: tuple[int, ...] = tuple(range(1, 21))
    norm_mode: str = "oracle_norm"
    methods: tuple[str, ...] = ("AR_SS", "AR_C")
    output_dir: Path = Path("results")
    master_seed: int = 1
    grid: GridSpec = GridSpec()
    population: PopulationParams = PopulationParams()
    game: GameConfig = GameConfig()
    ss_max_int: int = 20
    ss_stop_on_stall: bool = False
    direct_range: tuple[float, float] = (0.0, 1000.0)
    direct_budget: int = 20
    jobs: int = 1
    cal_mu_di: tuple[float, ...] = tuple(np.round(np.arange(-1.0, 1.0001, 0.25), 6))
    cal_mu_vw: tuple[float, ...] = tuple(np.round(np.arange(0.0, 1.0001, 0.25), 6))
    cal_seeds: int = 30

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be at least 1")
        if not self.rounds_range:
            raise ValueError("rounds_range is empty")
        if min(self.rounds_range) < 1 or max(self.rounds_range) > self.game.rounds:
            raise ValueError(f"m values must lie in 1..{self.game.rounds}")
        if self.norm_mode not in NORM_MODES:
            raise ValueError(f"norm_mode must be one of {NORM_MODES}")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}")
        if self.ss_max_int < 0 or self.direct_budget < 0:
            raise ValueError("interaction budgets must be non-negative")
        if self.cal_seeds < 1:
            raise ValueError("cal_seeds must be at least 1")


@dataclass(frozen=True)
class CaseResult:
    run_seed: int
    proposer_id: int
    m: int
    method: str
    n_solutions: int
    min_fitness: float
    interactions: int
    rmse: float
    rmse_demand: float
    std_or: float
    std_di_hat: float
    std_vw_hat: float


@dataclass(frozen=True)
class AggregateRow:
    method: str
    m: int
    rmse: float
    rmse_demand: float
    pct_unique: float
    mean_solutions: float
    mean_interactions: float
    std_or: float
    std_di_hat: float
    std_vw_hat: float
    n_cases: int


@dataclass
class ExperimentResult:
    rows: list[AggregateRow]
    cases: list[CaseResult] = field(default_factory=list)
    reports: list[tuple[int, ReductionReport]] = field(default_factory=list)

    def row(self, method: str, m: int) -> AggregateRow:
        for r in self.rows:
            if r.method == method and r.m == m:
                return r
        raise KeyError((method, m))


def run_seeds(master_seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(master_seed).generate_state(n)]


def case_metrics(trace: ObservationTrace, sols: SolutionSet) -> tuple[float, float, float, float]:
    """Mean in-sample RMSE over the solution points, norm spread, estimate spread."""
    vd = np.array([value_demand(float(d), trace.pie) for d in sols.di], dtype=float)
    norms = np.asarray(trace.norms, dtype=float)
    demands = np.asarray(trace.demands, dtype=float)
    vw = sols.vw[:, None]
    pred = np.floor(vw * vd[:, None] + (1.0 - vw) * norms[None, :] + 0.5)
    rmse = np.sqrt(np.mean((pred - demands[None, :]) ** 2, axis=1))
    return float(rmse.mean()), float(norms.std()), float(sols.di.std()), float(sols.vw.std())


def _case(seed: int, pid: int, m: int, method: str, trace: ObservationTrace, sols: SolutionSet,
          interactions: int) -> CaseResult:
    rmse, std_or, sdi, svw = case_metrics(trace, sols)
    return CaseResult(seed, pid, m, method, len(sols), sols.fitness, interactions,
                      rmse / trace.pie, rmse, std_or, sdi, svw)


def _method_kwargs(config: ExperimentConfig, method: str) -> dict[str, Any]:
    if method == "AR_SS":
        return {"stop_on_stall": config.ss_stop_on_stall}
    if method == "AR_DIRECT":
        return {"norm_range": config.direct_range, "budget": config.direct_budget}
    return {}


def run_cases(seed: int, config: ExperimentConfig, methods: Sequence[str] = ()):
    """All cases of one game run."""
    game = run_game(config.population, config.game, seed)
    cases: list[CaseResult] = []
    reports: list[tuple[int, ReductionReport]] = []
    ms = sorted(set(config.rounds_range))
    for agent in game.proposers:
        pid = agent.agent_id
        full = norm_inputs_for_estimation(game, pid, config.game.rounds, config.norm_mode)
        records = game.proposer_records(pid)
        for m, sols, acc in prefix_estimates(full, ms, config.grid):
            trace = full.prefix(m)
            cases.append(_case(seed, pid, m, BASELINE, trace, sols, 0))
            for method in methods:
                if not sols.ambiguous:
                    cases.append(_case(seed, pid, m, method, trace, sols, 0))
                    continue
                session = ElicitationSession(
                    sha_profile=agent.profile,
                    working_obs=game.snapshots[pid][m],
                    history=tuple((r.demand, r.accepted) for r in records[:m]),
                    trace=trace,
                    accumulator=acc.copy(),
                    max_int=config.ss_max_int,
                )
                rep = reduce(session, method, **_method_kwargs(config, method))
                reports.append((seed, rep))
                cases.append(_case(seed, pid, m, method, session.trace, session.solutions, rep.interactions))
    return cases, reports


def aggregate(cases: Sequence[CaseResult]) -> list[AggregateRow]:
    groups: dict[tuple[str, int], list[CaseResult]] = {}
    for c in cases:
        groups.setdefault((c.method, c.m), []).append(c)
    order = {BASELINE: 0, **{m: i + 1 for i, m in enumerate(METHODS)}}
    rows = []
    for (method, m), cs in sorted(groups.items(), key=lambda kv: (order[kv[0][0]], kv[0][1])):
        n = len(cs)
        col = lambda name: float(np.mean([getattr(c, name) for c in cs]))
        rows.append(AggregateRow(
            method=method,
            m=m,
            rmse=col("rmse"),
            rmse_demand=col("rmse_demand"),
            pct_unique=100.0 * sum(c.n_solutions == 1 for c in cs) / n,
            mean_solutions=col("n_solutions"),
            mean_interactions=col("interactions"),
            std_or=col("std_or"),
            std_di_hat=col("std_di_hat"),
            std_vw_hat=col("std_vw_hat"),
            n_cases=n,
        ))
    return rows


def _run_all(config: ExperimentConfig, methods: Sequence[str]) -> ExperimentResult:
    seeds = run_seeds(config.master_seed, config.n_runs)
    cases: list[CaseResult] = []
    reports: list[tuple[int, ReductionReport]] = []
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as ex:
            outs = list(ex.map(run_cases, seeds, [config] * len(seeds), [tuple(methods)] * len(seeds)))
    else:
        outs = [run_cases(s, config, methods) for s in seeds]
    for c, r in outs:
        cases.extend(c)
        reports.extend(r)
    log.info("evaluated %d cases over %d runs", len(cases), len(seeds))
    return ExperimentResult(aggregate(cases), cases, reports)


def experiment_estimation(config: ExperimentConfig) -> ExperimentResult:
    return _run_all(config, ())


def experiment_reduction(config: ExperimentConfig) -> ExperimentResult:
    return _run_all(config, config.methods)


# --- files -------------------------------------------------------------------

def write_cases(path: Path, cases: Sequence[CaseResult]) -> None:
    write_dataclasses(path, list(cases))


def write_reports(path: Path, reports: Sequence[tuple[int, ReductionReport]]) -> None:
    names = [f.name for f in fields(ReductionReport)]
    write_rows(path, ["run_seed", *names], ([s, *(getattr(r, n) for n in names)] for s, r in reports))


def run_experiment(kind: str, config: ExperimentConfig, plots: bool = True) -> ExperimentResult:
    """Run ``fig2``, ``fig3`` or ``table2`` and write its files to ``config.output_dir``."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "fig2":
        res = experiment_estimation(config)
        write_cases(out / "estimates.csv", res.cases)
        write_dataclasses(out / "fig2.csv", res.rows)
    elif kind in ("fig3", "table2"):
        if kind == "table2":
            config = replace(config, rounds_range=(10,))
        res = experiment_reduction(config)
        write_cases(out / "estimates.csv", [c for c in res.cases if c.method == BASELINE])
        write_reports(out / "reduction.csv", res.reports)
        write_dataclasses(out / f"{kind}.csv", res.rows)
    else:
        raise ValueError(f"unknown experiment {kind!r}")
    if plots and kind != "table2":
        from .plotting import plot_fig2, plot_fig3
        (plot_fig2 if kind == "fig2" else plot_fig3)(res.rows, out / f"{kind}.png")
    return res


# --- config files ------------------------------------------------------------

def _int_list(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def _float_range(text: str) -> tuple[float, ...]:
    """``lo:hi:step`` (inclusive) or a comma list."""
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        n = int(np.floor((hi - lo) / step + 0.5)) + 1
        return tuple(float(x) for x in np.round(lo + step * np.arange(n), 10))
    return tuple(float(x) for x in text.split(",") if x.strip())


_GAME_KEYS = {"pie": "pie", "game_rounds": "rounds", "players": "proposers"}
_POP_KEYS = ("mu_di", "sigma_di", "mu_vw", "sigma_vw")
_GRID_KEYS = ("di_min", "di_max", "vw_min", "vw_max", "step")


def load_config(path: Path | None = None, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Build a config from a flat ``key = value`` file plus string overrides."""
    values: dict[str, str] = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        with open(path) as fh:
            parser.read_string("[config]\n" + fh.read())
        values.update(parser["config"])
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_mapping(values)


def config_from_mapping(values: dict[str, str]) -> ExperimentConfig:
    values = dict(values)
    kw: dict[str, Any] = {}
    game_kw = {}
    for key, attr in _GAME_KEYS.items():
        if key in values:
            game_kw[attr] = int(values.pop(key))
    if "proposers" in game_kw:
        game_kw["responders"] = game_kw["proposers"]
    pop_kw: dict[str, Any] = {k: float(values.pop(k)) for k in _POP_KEYS if k in values}
    if "vw_bounding" in values:
        pop_kw["vw_bounding"] = values.pop("vw_bounding").strip()
    grid_kw = {k: float(values.pop(k)) for k in _GRID_KEYS if k in values}

    simple = {"n_runs": int, "master_seed": int, "ss_max_int": int, "direct_budget": int,
              "jobs": int, "cal_seeds": int, "norm_mode": str.strip, "output_dir": Path}
    for key, conv in simple.items():
        if key in values:
            kw[key] = conv(values.pop(key))
    if "rounds" in values:
        kw["rounds_range"] = _int_list(values.pop("rounds"))
    if "methods" in values:
        kw["methods"] = tuple(m.strip().upper() for m in values.pop("methods").split(",") if m.strip())
    if "ss_stop_on_stall" in values:
        kw["ss_stop_on_stall"] = values.pop("ss_stop_on_stall").strip().lower() in ("1", "true", "yes")
    if "direct_min" in values or "direct_max" in values:
        kw["direct_range"] = (float(values.pop("direct_min", 0)), float(values.pop("direct_max", 1000)))
    for key in ("cal_mu_di", "cal_mu_vw"):
        if key in values:
            kw[key] = _float_range(values.pop(key))
    if values:
        raise ValueError(f"unknown config keys: {', '.join(sorted(values))}")

    game = GameConfig(**game_kw)
    if "rounds_range" not in kw and game.rounds != 20:
        kw["rounds_range"] = tuple(range(1, game.rounds + 1))
    return ExperimentConfig(game=game, population=PopulationParams(**pop_kw), grid=GridSpec(**grid_kw), **kw)
