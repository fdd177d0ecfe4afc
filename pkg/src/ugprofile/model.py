"""Decision model of a simulated Ultimatum Game player.

A player blends a value-based demand (wealth vs. fairness trade-off) with a
norm-based demand inferred from the replies it has seen. Responders use the
same blend to form an acceptance threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

# Human round-1 demand distribution, used whenever no history is available.
EMPIRICAL_DEMAND_MEAN = 561.8
EMPIRICAL_DEMAND_STD = 128.9

NORM_SOURCES = ("computed", "drawn", "counterfactual", "probed")


@dataclass(frozen=True)
class Profile:
    """Latent preferences of one agent.

    ``di`` is the difference in importance of wealth over fairness and
    ``vw`` the weight put on values (``1 - vw`` goes to norms).
    """

    di: float
    vw: float

    def __post_init__(self):
        if not 0.0 <= self.vw <= 1.0:
            raise ValueError(f"vw must lie in [0, 1], got {self.vw}")


@dataclass(frozen=True)
class GameConfig:
    pie: int = 1000
    rounds: int = 20
    proposers: int = 16
    responders: int = 16

    def __post_init__(self):
        if self.pie <= 0 or self.proposers <= 0 or self.responders <= 0:
            raise ValueError("pie and player counts must be positive")
        if self.rounds < 0:
            raise ValueError("rounds must be non-negative")
        if self.proposers != self.responders:
            raise ValueError("pairing requires as many proposers as responders")


@dataclass(frozen=True)
class NormValue:
    value: float
    source: str = "computed"

    def __post_init__(self):
        if self.source not in NORM_SOURCES:
            raise ValueError(f"unknown norm source {self.source!r}")


@dataclass(frozen=True)
class ObservationState:
    """Own demands a proposer has seen rejected and accepted."""

    pie: int = 1000
    rejected: tuple[int, ...] = ()
    accepted: tuple[int, ...] = ()

    def __post_init__(self):
        for d in self.rejected + self.accepted:
            if not 0 <= d <= self.pie:
                raise ValueError(f"demand {d} outside [0, {self.pie}]")

    def with_reply(self, demand: int, accepted: bool) -> "ObservationState":
        if accepted:
            return ObservationState(self.pie, self.rejected, self.accepted + (int(demand),))
        return ObservationState(self.pie, self.rejected + (int(demand),), self.accepted)

    @property
    def size(self) -> int:
        return len(self.rejected) + len(self.accepted)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_demand(d: int, pie: int) -> None:
    if not 0 <= d <= pie:
        raise ValueError(f"demand {d} outside [0, {pie}]")


def utility(d: int, di: float, pie: int = 1000) -> float:
    """Value-based utility of demanding ``d`` out of ``pie``.

    Wealth satisfaction is the share ``d/pie``; fairness satisfaction is one
    minus the relative distance from the equal split. Each satisfaction enters
    as ``-weight / (satisfaction + 0.5)``.
    """
    if pie <= 0:
        raise ValueError("pie must be positive")
    _check_demand(d, pie)
    wealth = d / pie
    fairness = 1.0 - abs(0.5 * pie - d) / (0.5 * pie)
    return -(1.0 + 0.5 * di) / (wealth + 0.5) - (1.0 - 0.5 * di) / (fairness + 0.5)


def utility_curve(di: float, pie: int = 1000) -> np.ndarray:
    """``utility`` evaluated at every demand ``0..pie`` (same operation order)."""
    d = np.arange(pie + 1)
    wealth = d / pie
    fairness = 1.0 - np.abs(0.5 * pie - d) / (0.5 * pie)
    return -(1.0 + 0.5 * di) / (wealth + 0.5) - (1.0 - 0.5 * di) / (fairness + 0.5)


@lru_cache(maxsize=65536)
def value_demand(di: float, pie: int = 1000) -> int:
    """Demand maximizing ``utility``; ties go to the smallest demand."""
    if pie <= 0:
        raise ValueError("pie must be positive")
    return int(np.argmax(utility_curve(float(di), pie)))


def _draw_empirical(rng: np.random.Generator, pie: int) -> float:
    x = rng.normal(EMPIRICAL_DEMAND_MEAN, EMPIRICAL_DEMAND_STD)
    return float(min(max(x, 0.0), float(pie)))


def norm_value_from_sets(rejected: Iterable[int], accepted: Iterable[int], pie: int) -> Optional[float]:
    """Norm implied by observed rejections/acceptances, or None when both are empty."""
    rejected = tuple(rejected)
    accepted = tuple(accepted)
    if rejected and accepted:
        return (min(rejected) + max(accepted)) / 2
    if rejected:
        return (min(rejected) + 0.5 * pie) / 2
    if accepted:
        return (max(accepted) + pie) / 2
    return None


def norm_demand(obs: ObservationState, rng: Optional[np.random.Generator] = None) -> NormValue:
    """Norm-based demand from the proposer's observed replies.

    With no history the norm is drawn from the empirical human demand
    distribution (clamped to the pie). The draw is returned but never written
    back into ``obs``.
    """
    value = norm_value_from_sets(obs.rejected, obs.accepted, obs.pie)
    if value is not None:
        return NormValue(value, "computed")
    if rng is None:
        raise ValueError("an RNG is required when there is no observation history")
    return NormValue(_draw_empirical(rng, obs.pie), "drawn")


def blend(vw: float, value_part: float, norm_part: float) -> int:
    # Single definition shared by the SHA and the vectorized estimator.
    return round_half_up(vw * value_part + (1.0 - vw) * norm_part)


def combined_demand(profile: Profile, norm: NormValue | float, pie: int = 1000) -> int:
    n = norm.value if isinstance(norm, NormValue) else float(norm)
    if not 0.0 <= n <= pie:
        raise ValueError(f"norm {n} outside [0, {pie}]")
    return blend(profile.vw, value_demand(profile.di, pie), n)


def responder_threshold(profile: Profile, observed_demands: Iterable[int], pie: int = 1000,
                        rng: Optional[np.random.Generator] = None) -> int:
    observed = list(observed_demands)
    if observed:
        norm = float(np.mean(observed))
    else:
        if rng is None:
            raise ValueError("an RNG is required when no demands were observed")
        norm = _draw_empirical(rng, pie)
    return blend(profile.vw, value_demand(profile.di, pie), norm)


def responder_reply(threshold: int, demand: int) -> bool:
    """True (accept) iff the demand does not exceed the threshold."""
    return demand <= threshold
