import csv
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ugprofile.game import (
    PopulationParams,
    pair,
    run_game,
    sample_population,
    write_population_csv,
    write_runs_csv,
)
from ugprofile.model import GameConfig, combined_demand, norm_demand, value_demand


def test_degenerate_population_is_identical():
    params = PopulationParams(mu_di=0.3, sigma_di=0.0, mu_vw=0.5, sigma_vw=0.0)
    pop = sample_population(params, 16, np.random.default_rng(0))
    assert all(p.di == 0.3 and p.vw == 0.5 for p in pop)


def test_clamp_fraction_at_zero():
    params = PopulationParams(vw_bounding="clamp")
    pop = sample_population(params, 20000, np.random.default_rng(5))
    share = np.mean([p.vw == 0.0 for p in pop])
    expected = NormalDist().cdf(0.6 / 1.14)
    assert share == pytest.approx(expected, abs=0.01)


def test_truncation_keeps_interior_draws():
    pop = sample_population(PopulationParams(), 5000, np.random.default_rng(5))
    vw = np.array([p.vw for p in pop])
    assert vw.min() >= 0.0 and vw.max() <= 1.0
    assert np.mean(vw == 0.0) == 0.0


def test_population_reproducible():
    a = sample_population(PopulationParams(), 16, np.random.default_rng(9))
    b = sample_population(PopulationParams(), 16, np.random.default_rng(9))
    assert a == b


def test_pair_rotation():
    assert pair(1, 16)[0] == (0, 0)
    assert pair(2, 16)[0] == (0, 1)
    assert pair(17, 16) == pair(1, 16)


@given(st.integers(1, 200), st.integers(1, 40))
def test_pair_is_permutation(k, n):
    p = pair(k, n)
    assert sorted(i for i, _ in p) == list(range(n))
    assert sorted(j for _, j in p) == list(range(n))


def test_pair_rejects_bad_round():
    with pytest.raises(ValueError):
        pair(0, 16)


def test_zero_rounds():
    log = run_game(config=GameConfig(rounds=0), seed=1)
    assert log.records == ()
    assert len(log.population) == 32


def test_default_record_count():
    assert len(run_game(seed=4).records) == 320


def test_value_only_population_plays_constant():
    params = PopulationParams(mu_di=0.5, sigma_di=0.0, mu_vw=2.0, sigma_vw=0.0, vw_bounding="clamp")
    log = run_game(params, seed=3)
    assert {r.demand for r in log.records} == {value_demand(0.5)}


def test_run_is_deterministic():
    assert run_game(seed=12) == run_game(seed=12)
    assert run_game(seed=12).records != run_game(seed=13).records


def test_first_round_norms_are_drawn_then_computed():
    log = run_game(seed=2)
    for r in log.records:
        assert r.proposer_norm.source == ("drawn" if r.round == 1 else "computed")


def test_logged_demands_replay():
    log = run_game(seed=21)
    for r in log.records:
        prof = log.profile(r.proposer_id)
        assert combined_demand(prof, r.proposer_norm, 1000) == r.demand
        if r.round > 1:
            assert norm_demand(log.snapshots[r.proposer_id][r.round - 1]) == r.proposer_norm
        assert r.accepted == (r.demand <= r.responder_threshold)


def test_snapshots_grow_by_one_reply():
    log = run_game(seed=8)
    for pid, snaps in log.snapshots.items():
        assert [s.size for s in snaps] == list(range(21))


def test_unknown_proposer():
    log = run_game(seed=1)
    with pytest.raises(KeyError):
        log.proposer_records(99)
    with pytest.raises(KeyError):
        log.profile(99)


def test_population_params_validation():
    with pytest.raises(ValueError):
        PopulationParams(sigma_di=-1)
    with pytest.raises(ValueError):
        PopulationParams(vw_bounding="reflect")


def test_csv_writers(tmp_path):
    log = run_game(seed=7)
    write_runs_csv([log], tmp_path / "runs.csv")
    write_population_csv(log, tmp_path / "pop.csv")
    rows = list(csv.DictReader(open(tmp_path / "runs.csv")))
    assert len(rows) == 320
    assert rows[0]["norm_source"] == "drawn"
    assert int(rows[5]["demand"]) == log.records[5].demand
    pop = list(csv.DictReader(open(tmp_path / "pop.csv")))
    assert [r["role"] for r in pop].count("proposer") == 16
