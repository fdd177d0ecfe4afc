"""Exhaustive grid estimation of a proposer's (di, vw) from observed demands.

Fitness is the mean absolute deviation between the demand a candidate profile
would have made under each round's norm input and the demand actually
observed. Every candidate attaining the minimum is returned; more than one
means the observations are ambiguous.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .game import RunLog
from .model import EMPIRICAL_DEMAND_MEAN, NormValue, Profile, blend, value_demand
from .report import fmt

NORM_MODES = ("oracle_norm", "mean_norm")


@dataclass(frozen=True)
class GridSpec:
    di_min: float = -0.15
    di_max: float = 1.79
    vw_min: float = 0.0
    vw_max: float = 1.0
    step: float = 0.01

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.di_min > self.di_max or self.vw_min > self.vw_max:
            raise ValueError("grid minimum exceeds maximum")

    @staticmethod
    def _axis(lo: float, hi: float, step: float) -> np.ndarray:
        # Both endpoints inclusive; rounding keeps values identical to their decimal literal.
        n = int(np.floor((hi - lo) / step + 0.5)) + 1
        return np.round(lo + step * np.arange(n), 10)

    @property
    def di_values(self) -> np.ndarray:
        return self._axis(self.di_min, self.di_max, self.step)

    @property
    def vw_values(self) -> np.ndarray:
        return self._axis(self.vw_min, self.vw_max, self.step)

    @property
    def size(self) -> int:
        return len(self.di_values) * len(self.vw_values)


@lru_cache(maxsize=32)
def value_demand_table(grid: GridSpec, pie: int = 1000) -> np.ndarray:
    """Value demand for every di on the grid, computed once per grid."""
    return np.array([value_demand(float(d), pie) for d in grid.di_values], dtype=float)


@dataclass(frozen=True)
class TraceEntry:
    round: int
    norm: NormValue
    demand: int


@dataclass(frozen=True)
class ObservationTrace:
    proposer_id: int
    entries: tuple[TraceEntry, ...] = ()
    pie: int = 1000

    def __post_init__(self):
        rounds = [e.round for e in self.entries]
        if any(b <= a for a, b in zip(rounds, rounds[1:])):
            raise ValueError("trace rounds must be strictly increasing")
        for e in self.entries:
            if not 0 <= e.demand <= self.pie:
                raise ValueError(f"demand {e.demand} outside [0, {self.pie}]")

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, norm: NormValue, demand: int) -> "ObservationTrace":
        k = self.entries[-1].round + 1 if self.entries else 1
        return ObservationTrace(self.proposer_id, self.entries + (TraceEntry(k, norm, int(demand)),), self.pie)

    def prefix(self, m: int) -> "ObservationTrace":
        return ObservationTrace(self.proposer_id, self.entries[:m], self.pie)

    @property
    def norms(self) -> list[float]:
        return [e.norm.value for e in self.entries]

    @property
    def demands(self) -> list[int]:
        return [e.demand for e in self.entries]


@dataclass(frozen=True, eq=False)
class SolutionSet:
    di: np.ndarray
    vw: np.ndarray
    fitness: float
    evaluated: int

    def __len__(self) -> int:
        return len(self.di)

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.di, self.vw)]

    @property
    def ambiguous(self) -> bool:
        return len(self.di) > 1

    def __contains__(self, profile: Profile) -> bool:
        return bool(np.any((self.di == profile.di) & (self.vw == profile.vw)))

    def write_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["di", "vw", "fitness"])
            for a, b in self.points:
                w.writerow([fmt(a), fmt(b), fmt(self.fitness)])
            w.writerow(["n_solutions", "min_fitness", "evaluated"])
            w.writerow([len(self), fmt(self.fitness), self.evaluated])


def fitness(profile: Profile, trace: ObservationTrace) -> float:
    if len(trace) == 0:
        raise ValueError("fitness needs at least one observed round")
    vd = value_demand(profile.di, trace.pie)
    total = 0
    for e in trace.entries:
        total += abs(blend(profile.vw, vd, e.norm.value) - e.demand)
    return total / len(trace)


class DeviationAccumulator:
    """Running sum of absolute demand deviations over the whole grid.

    Sums are integers, so the minimum and the equality test between grid
    points are exact regardless of the order rounds are added in.
    """

    def __init__(self, grid: GridSpec = GridSpec(), pie: int = 1000):
        self.grid = grid
        self.pie = pie
        self._di = grid.di_values
        self._vw = grid.vw_values
        vd = value_demand_table(grid, pie)
        self._value_part = self._vw[None, :] * vd[:, None]
        self._norm_weight = (1.0 - self._vw)[None, :]
        self.sums = np.zeros((len(self._di), len(self._vw)), dtype=np.int64)
        self.count = 0

    def predictions(self, norm: float) -> np.ndarray:
        return np.floor(self._value_part + self._norm_weight * norm + 0.5).astype(np.int64)

    def add(self, norm: float, demand: int) -> None:
        self.sums += np.abs(self.predictions(norm) - int(demand))
        self.count += 1

    def copy(self) -> "DeviationAccumulator":
        other = object.__new__(DeviationAccumulator)
        other.__dict__.update(self.__dict__)
        other.sums = self.sums.copy()
        return other

    def solutions(self, atol: float = 0.0) -> SolutionSet:
        if self.count == 0:
            # Nothing observed yet: every grid point is equally consistent.
            i, j = np.nonzero(self.sums == 0)
            return SolutionSet(self._di[i], self._vw[j], 0.0, self.grid.size)
        best = int(self.sums.min())
        limit = best + atol * self.count
        i, j = np.nonzero(self.sums <= limit)
        return SolutionSet(self._di[i], self._vw[j], best / self.count, self.grid.size)


def estimate(trace: ObservationTrace, grid: GridSpec = GridSpec(), atol: float = 0.0) -> SolutionSet:
    if len(trace) == 0:
        raise ValueError("estimation needs at least one observed round")
    acc = DeviationAccumulator(grid, trace.pie)
    for e in trace.entries:
        acc.add(e.norm.value, e.demand)
    return acc.solutions(atol)


def prefix_estimates(trace: ObservationTrace, ms: Sequence[int], grid: GridSpec = GridSpec(),
                     atol: float = 0.0) -> Iterator[tuple[int, SolutionSet, DeviationAccumulator]]:
    """Estimates for each prefix length in ``ms`` sharing one pass over the trace.

    The accumulator yielded is a private copy, safe to keep extending.
    """
    wanted = sorted(set(ms))
    if wanted and (wanted[0] < 1 or wanted[-1] > len(trace)):
        raise ValueError("prefix lengths must lie in 1..len(trace)")
    acc = DeviationAccumulator(grid, trace.pie)
    for k, e in enumerate(trace.entries, start=1):
        acc.add(e.norm.value, e.demand)
        if k in wanted:
            yield k, acc.solutions(atol), acc.copy()


def norm_inputs_for_estimation(log: RunLog, proposer_id: int, m: int,
                               mode: str = "oracle_norm") -> ObservationTrace:
    """Observed (norm input, demand) pairs of rounds ``1..m`` for one proposer.

    Rounds whose norm was drawn (empty history) use the realized draw under
    ``oracle_norm`` and the empirical mean under ``mean_norm``.
    """
    if mode not in NORM_MODES:
        raise ValueError(f"mode must be one of {NORM_MODES}")
    records = log.proposer_records(proposer_id)
    if not 1 <= m <= len(records):
        raise ValueError(f"m must lie in 1..{len(records)}, got {m}")
    entries = []
    for r in records[:m]:
        norm = r.proposer_norm
        if norm.source == "drawn" and mode == "mean_norm":
            norm = NormValue(EMPIRICAL_DEMAND_MEAN, "drawn")
        entries.append(TraceEntry(r.round, norm, r.demand))
    return ObservationTrace(proposer_id, tuple(entries), log.config.pie)
