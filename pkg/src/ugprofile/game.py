"""Ultimatum Game runs: population sampling, pairing and round execution."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import (
    GameConfig,
    NormValue,
    ObservationState,
    Profile,
    combined_demand,
    norm_demand,
    responder_reply,
    responder_threshold,
)
from .report import fmt

VW_BOUNDING = ("truncate", "clamp")


@dataclass(frozen=True)
class PopulationParams:
    """Normal distributions of ``di`` and ``vw`` across agents.

    ``vw_bounding`` decides how ``vw`` draws are kept inside [0, 1]:
    ``"truncate"`` redraws out-of-range samples, ``"clamp"`` clips them.
    """

    mu_di: float = 0.5
    sigma_di: float = 0.25
    mu_vw: float = -0.6
    sigma_vw: float = 1.14
    vw_bounding: str = "truncate"

    def __post_init__(self):
        if self.sigma_di < 0 or self.sigma_vw < 0:
            raise ValueError("standard deviations must be non-negative")
        if self.vw_bounding not in VW_BOUNDING:
            raise ValueError(f"vw_bounding must be one of {VW_BOUNDING}")


@dataclass(frozen=True)
class RoundRecord:
    round: int
    proposer_id: int
    responder_id: int
    demand: int
    accepted: bool
    proposer_norm: NormValue
    responder_threshold: int


@dataclass(frozen=True)
class Agent:
    agent_id: int
    role: str
    profile: Profile


@dataclass(frozen=True)
class RunLog:
    config: GameConfig
    seed: int
    population: tuple[Agent, ...]
    records: tuple[RoundRecord, ...]
    # snapshots[pid][k] is the proposer's observation state after k rounds.
    snapshots: dict[int, tuple[ObservationState, ...]]

    @property
    def proposers(self) -> list[Agent]:
        return [a for a in self.population if a.role == "proposer"]

    def profile(self, agent_id: int) -> Profile:
        for a in self.population:
            if a.agent_id == agent_id:
                return a.profile
        raise KeyError(f"unknown agent {agent_id}")

    def proposer_records(self, proposer_id: int) -> list[RoundRecord]:
        if proposer_id not in self.snapshots:
            raise KeyError(f"unknown proposer {proposer_id}")
        return [r for r in self.records if r.proposer_id == proposer_id]

    def round_records(self, k: int) -> list[RoundRecord]:
        return [r for r in self.records if r.round == k]


def _sample_vw(params: PopulationParams, n: int, rng: np.random.Generator) -> np.ndarray:
    if params.sigma_vw == 0 or params.vw_bounding == "clamp":
        return np.clip(rng.normal(params.mu_vw, params.sigma_vw, n), 0.0, 1.0)
    out = np.empty(0)
    while out.size < n:
        x = rng.normal(params.mu_vw, params.sigma_vw, 4 * n)
        out = np.concatenate([out, x[(x >= 0.0) & (x <= 1.0)]])
    return out[:n]


def sample_population(params: PopulationParams, n: int, rng: np.random.Generator) -> list[Profile]:
    """Draw ``n`` profiles; ``di`` first, then ``vw``, from the same stream."""
    di = rng.normal(params.mu_di, params.sigma_di, n)
    vw = _sample_vw(params, n, rng)
    return [Profile(float(a), float(b)) for a, b in zip(di, vw)]


def pair(round_: int, n: int) -> list[tuple[int, int]]:
    """Rotation pairing: proposer i meets responder (i + round - 1) mod n."""
    if round_ < 1 or n < 1:
        raise ValueError("round and n must be positive")
    return [(i, (i + round_ - 1) % n) for i in range(n)]


def spawn_streams(seed: int) -> dict[str, np.random.Generator]:
    names = ("population", "proposer_norms", "responder_norms")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(s) for name, s in zip(names, children)}


def run_game(params: PopulationParams = PopulationParams(), config: GameConfig = GameConfig(),
             seed: int = 0) -> RunLog:
    streams = spawn_streams(seed)
    n = config.proposers
    pie = config.pie
    proposers = sample_population(params, n, streams["population"])
    responders = sample_population(params, config.responders, streams["population"])
    population = tuple(
        [Agent(i, "proposer", p) for i, p in enumerate(proposers)]
        + [Agent(n + j, "responder", p) for j, p in enumerate(responders)]
    )

    states = [ObservationState(pie) for _ in range(n)]
    snapshots: list[list[ObservationState]] = [[s] for s in states]
    seen: list[list[int]] = [[] for _ in range(config.responders)]
    records: list[RoundRecord] = []

    for k in range(1, config.rounds + 1):
        # Every demand is formed from last round's state before any reply lands.
        norms = [norm_demand(states[i], streams["proposer_norms"]) for i in range(n)]
        demands = [combined_demand(proposers[i], norms[i], pie) for i in range(n)]
        for i, j in pair(k, n):
            seen[j].append(demands[i])
            t = responder_threshold(responders[j], seen[j], pie, streams["responder_norms"])
            accepted = responder_reply(t, demands[i])
            states[i] = states[i].with_reply(demands[i], accepted)
            snapshots[i].append(states[i])
            records.append(RoundRecord(k, i, n + j, demands[i], accepted, norms[i], t))

    return RunLog(
        config=config,
        seed=seed,
        population=population,
        records=tuple(records),
        snapshots={i: tuple(s) for i, s in enumerate(snapshots)},
    )


RUN_HEADER = ["run_seed", "round", "proposer_id", "responder_id", "demand", "accepted",
              "norm_value", "norm_source", "threshold"]
POPULATION_HEADER = ["agent_id", "role", "di", "vw"]


def write_runs_csv(logs: Sequence[RunLog], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUN_HEADER)
        for log in logs:
            for r in log.records:
                w.writerow([log.seed, r.round, r.proposer_id, r.responder_id, r.demand,
                            int(r.accepted), fmt(r.proposer_norm.value), r.proposer_norm.source,
                            r.responder_threshold])


def write_population_csv(log: RunLog, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POPULATION_HEADER)
        for a in log.population:
            w.writerow([a.agent_id, a.role, fmt(a.profile.di), fmt(a.profile.vw)])
