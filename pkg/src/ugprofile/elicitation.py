"""Side-game queries that shrink an ambiguous solution set.

The profiler plays responder in an imaginary continuation of the game and
asks the proposer what it would demand. Three ways of choosing the norm the
proposer sees:

* ``ar_ss``: keep playing, rejecting demands below every earlier rejection
  and accepting demands above every earlier acceptance.
* ``ar_c``: ask about a counterfactual history where one past reply is
  flipped, picking the flip whose norm is farthest from those already seen.
* ``ar_direct``: set the norm outright, farthest-point style.

None of this touches the game log; the session works on copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .estimation import (
    DeviationAccumulator,
    GridSpec,
    ObservationTrace,
    SolutionSet,
    norm_inputs_for_estimation,
)
from .game import RunLog
from .model import NormValue, ObservationState, Profile, combined_demand, norm_value_from_sets

METHODS = ("AR_SS", "AR_C", "AR_DIRECT")


@dataclass(frozen=True)
class ReductionReport:
    method: str
    proposer_id: int
    m: int
    initial_solutions: int
    final_solutions: int
    interactions: int
    final_fitness: float


@dataclass
class ElicitationSession:
    sha_profile: Profile
    working_obs: ObservationState
    history: tuple[tuple[int, bool], ...]
    trace: ObservationTrace
    accumulator: DeviationAccumulator
    max_int: int = 20
    count: int = 0
    solutions: SolutionSet = field(init=False)

    def __post_init__(self):
        self.solutions = self.accumulator.solutions()
        self.initial_solutions = len(self.solutions)

    @classmethod
    def from_log(cls, log: RunLog, proposer_id: int, m: int, grid: GridSpec = GridSpec(),
                 norm_mode: str = "oracle_norm", max_int: int = 20) -> "ElicitationSession":
        trace = norm_inputs_for_estimation(log, proposer_id, m, norm_mode)
        acc = DeviationAccumulator(grid, log.config.pie)
        for e in trace.entries:
            acc.add(e.norm.value, e.demand)
        records = log.proposer_records(proposer_id)[:m]
        return cls(
            sha_profile=log.profile(proposer_id),
            working_obs=log.snapshots[proposer_id][m],
            history=tuple((r.demand, r.accepted) for r in records),
            trace=trace,
            accumulator=acc,
            max_int=max_int,
        )

    @property
    def pie(self) -> int:
        return self.working_obs.pie

    @property
    def m(self) -> int:
        return len(self.history)

    def ask(self, norm: NormValue) -> int:
        """Query the proposer's demand under ``norm`` and fold it into the estimate."""
        demand = combined_demand(self.sha_profile, norm, self.pie)
        self.trace = self.trace.append(norm, demand)
        self.accumulator.add(norm.value, demand)
        self.solutions = self.accumulator.solutions()
        self.count += 1
        return demand

    def report(self, method: str) -> ReductionReport:
        return ReductionReport(method, self.trace.proposer_id, self.m, self.initial_solutions,
                               len(self.solutions), self.count, self.solutions.fitness)


def ar_ss(session: ElicitationSession, stop_on_stall: bool = False) -> ReductionReport:
    """Explore the search space by widening the observed reply range.

    A demand that neither undercuts the lowest rejection nor tops the highest
    acceptance leaves the observations unchanged. The loop still goes on by
    default (repeated answers reweight the fitness); ``stop_on_stall`` ends it.
    """
    while session.solutions.ambiguous and session.count < session.max_int:
        obs = session.working_obs
        value = norm_value_from_sets(obs.rejected, obs.accepted, obs.pie)
        if value is None:
            raise ValueError("session has no observed replies to form a norm from")
        d = session.ask(NormValue(value, "computed"))
        if not obs.rejected or d < min(obs.rejected):
            session.working_obs = obs.with_reply(d, accepted=False)
        elif not obs.accepted or d > max(obs.accepted):
            session.working_obs = obs.with_reply(d, accepted=True)
        elif stop_on_stall:
            break
    return session.report("AR_SS")


def counterfactual_norms(obs: ObservationState, history, exclude=()) -> list[tuple[int, float]]:
    """Norms reachable by flipping one past reply in a range-widening way.

    An accepted demand is flipped to rejected only if it undercuts every
    rejection; a rejected one to accepted only if it tops every acceptance.
    """
    out = []
    for i, (d, accepted) in enumerate(history):
        if i in exclude:
            continue
        rejected, acc = list(obs.rejected), list(obs.accepted)
        if accepted and (not rejected or d < min(rejected)):
            acc.remove(d)
            rejected.append(d)
        elif not accepted and (not acc or d > max(acc)):
            rejected.remove(d)
            acc.append(d)
        else:
            continue
        out.append((i, norm_value_from_sets(rejected, acc, obs.pie)))
    return out


def _distance_score(value: float, seen: list[float]) -> float:
    return min((abs(value - s) for s in seen), default=math.inf)


def ar_c(session: ElicitationSession) -> ReductionReport:
    """Counterfactual questions, at most one per observed round."""
    session.max_int = session.m
    used: set[int] = set()
    while session.solutions.ambiguous and session.count < session.max_int:
        candidates = counterfactual_norms(session.working_obs, session.history, used)
        if not candidates:
            break
        seen = session.trace.norms
        # max() keeps the first of equal scores, i.e. the earliest round.
        z, value = max(candidates, key=lambda c: _distance_score(c[1], seen))
        used.add(z)
        session.ask(NormValue(value, "counterfactual"))
    return session.report("AR_C")


def next_direct_probe(seen: list[float], lo: int, hi: int) -> int:
    """Integer norm in [lo, hi] farthest from every norm in ``seen``; lowest on ties."""
    candidates = np.arange(lo, hi + 1)
    if candidates.size == 0:
        raise ValueError("empty norm range")
    if not seen:
        return int(candidates[0])
    dist = np.min(np.abs(candidates[:, None] - np.asarray(seen, dtype=float)[None, :]), axis=1)
    return int(candidates[np.argmax(dist)])


def ar_direct(session: ElicitationSession, norm_range: tuple[float, float] = (0, 1000),
              budget: Optional[int] = None) -> ReductionReport:
    lo, hi = math.ceil(norm_range[0]), math.floor(norm_range[1])
    if lo > hi or lo < 0 or hi > session.pie:
        raise ValueError(f"norm range {norm_range} is empty or outside [0, {session.pie}]")
    if budget is not None:
        session.max_int = budget
    while session.solutions.ambiguous and session.count < session.max_int:
        probe = next_direct_probe(session.trace.norms, lo, hi)
        session.ask(NormValue(float(probe), "probed"))
    return session.report("AR_DIRECT")


def reduce(session: ElicitationSession, method: str, **kwargs) -> ReductionReport:
    if method == "AR_SS":
        return ar_ss(session, **kwargs)
    if method == "AR_C":
        return ar_c(session)
    if method == "AR_DIRECT":
        return ar_direct(session, **kwargs)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
