import csv
import math

import pytest

from ugprofile.calibration import (
    EMPIRICAL_TARGETS,
    PerformanceMeasures,
    average_measures,
    calibrate,
    measure,
    nrmse,
    score_setting,
    sweep,
    write_calibration_csv,
)
from ugprofile.game import PopulationParams, run_game
from ugprofile.model import GameConfig


def test_degenerate_population_measures():
    params = PopulationParams(mu_di=0.5, sigma_di=0.0, mu_vw=1.0, sigma_vw=0.0)
    m = measure(run_game(params, seed=1), 3)
    assert m.sigma_d == 0 and m.sigma_vd == 0


def test_all_accepted_measures():
    # Value-only players with modest demands against generous responders.
    params = PopulationParams(mu_di=-2.0, sigma_di=0.0, mu_vw=1.0, sigma_vw=0.0)
    m = measure(run_game(params, seed=1), 5)
    assert m.mu_a == 1.0 and m.sigma_a == 0.0


def test_measure_unknown_round():
    with pytest.raises(ValueError):
        measure(run_game(seed=1), 25)


def test_nrmse_identity_and_positivity():
    assert nrmse(EMPIRICAL_TARGETS) == 0.0
    doubled = {k: PerformanceMeasures(*(2 * x for x in vars(v).values())) for k, v in EMPIRICAL_TARGETS.items()}
    # every relative error is exactly 1
    assert nrmse(doubled) == pytest.approx(100.0)


def test_nrmse_direct_formula():
    measured = {1: PerformanceMeasures(600, 100, 0.8, 0.4, 130), 10: EMPIRICAL_TARGETS[10]}
    t = EMPIRICAL_TARGETS[1]
    errs = [(600 - t.mu_d) / t.mu_d, (100 - t.sigma_d) / t.sigma_d, (0.8 - t.mu_a) / t.mu_a,
            0.0, (130 - t.sigma_vd) / t.sigma_vd] + [0.0] * 5
    assert nrmse(measured) == pytest.approx(100 * math.sqrt(sum(e * e for e in errs) / 10))


def test_nrmse_missing_round():
    with pytest.raises(ValueError):
        nrmse({1: EMPIRICAL_TARGETS[1]})


def test_average_then_score():
    a = {1: PerformanceMeasures(500, 100, 0.8, 0.4, 120), 10: EMPIRICAL_TARGETS[10]}
    b = {1: PerformanceMeasures(600, 120, 0.9, 0.3, 130), 10: EMPIRICAL_TARGETS[10]}
    avg, score = score_setting([a, b])
    assert avg[1] == average_measures([a[1], b[1]])
    assert avg[1].mu_d == 550
    assert score == nrmse(avg)


def test_singleton_sweep():
    p = PopulationParams(mu_di=0.25, mu_vw=0.5)
    res = calibrate([p], [1])
    assert res.best_params == p
    assert len(res.table) == 1


def test_sweep_contains_calibrated_point(tmp_path):
    settings = sweep([0.25, 0.5], [-0.6, 0.5])
    assert PopulationParams() in settings
    res = calibrate(settings, [1, 2], jobs=1)
    assert any(r.params == PopulationParams() for r in res.table)
    assert res.nrmse == min(r.nrmse for r in res.table)
    write_calibration_csv(res, tmp_path / "cal.csv")
    rows = list(csv.DictReader(open(tmp_path / "cal.csv")))
    assert len(rows) == 4
    assert sum(int(r["best"]) for r in rows) == 1
    assert "mu_a_r10" in rows[0]


def test_calibrate_validation():
    with pytest.raises(ValueError):
        calibrate([], [1])
    with pytest.raises(ValueError):
        calibrate([PopulationParams()], [1], GameConfig(rounds=5))
