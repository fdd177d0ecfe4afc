import csv

import numpy as np
import pytest

from ugprofile.estimation import ObservationTrace, estimate
from ugprofile.experiments import (
    BASELINE,
    ExperimentConfig,
    aggregate,
    case_metrics,
    config_from_mapping,
    load_config,
    run_cases,
    run_experiment,
    run_seeds,
)
from ugprofile.model import NormValue, Profile, combined_demand


def test_config_defaults_and_validation():
    cfg = ExperimentConfig()
    assert cfg.n_runs == 100 and cfg.rounds_range == tuple(range(1, 21))
    with pytest.raises(ValueError):
        ExperimentConfig(n_runs=0)
    with pytest.raises(ValueError):
        ExperimentConfig(rounds_range=(21,))
    with pytest.raises(ValueError):
        ExperimentConfig(methods=("AR_Z",))
    with pytest.raises(ValueError):
        ExperimentConfig(norm_mode="nearest")


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("n_runs = 7\nrounds = 1-3, 10\nmethods = ar_ss, AR_DIRECT\n"
                    "mu_vw = 0.25  # comment\ncal_mu_di = 0:1:0.5\nvw_bounding = clamp\n")
    cfg = load_config(path, {"master_seed": "9", "n_runs": None})
    assert cfg.n_runs == 7 and cfg.master_seed == 9
    assert cfg.rounds_range == (1, 2, 3, 10)
    assert cfg.methods == ("AR_SS", "AR_DIRECT")
    assert cfg.population.mu_vw == 0.25 and cfg.population.vw_bounding == "clamp"
    assert cfg.cal_mu_di == (0.0, 0.5, 1.0)


def test_config_rejects_unknown_key():
    with pytest.raises(ValueError):
        config_from_mapping({"n_run": "3"})


def test_config_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "nope.cfg")


def test_run_seeds_deterministic():
    assert run_seeds(1, 5) == run_seeds(1, 5)
    assert run_seeds(1, 5)[:3] == run_seeds(1, 3)
    assert len(set(run_seeds(2, 100))) == 100


def test_case_metrics_exact_fit():
    p = Profile(0.5, 0.5)
    trace = ObservationTrace(0)
    for n in (575.0, 600.0, 700.0):
        trace = trace.append(NormValue(n, "computed"), combined_demand(p, n))
    rmse, std_or, sdi, svw = case_metrics(trace, estimate(trace))
    assert rmse == 0
    assert std_or == pytest.approx(np.std([575, 600, 700]))
    assert sdi >= 0 and svw >= 0


def test_noise_free_rmse_bounded_by_rounding(fig2_result):
    # Sampled profiles are off-grid, so single cases can miss by a few units;
    # the aggregate stays under half a unit.
    assert fig2_result.row(BASELINE, 20).rmse <= 0.5 / 1000


def test_unambiguous_cases_pass_through():
    cfg = ExperimentConfig(n_runs=1, rounds_range=(10,), methods=("AR_SS", "AR_C"))
    cases, reports = run_cases(run_seeds(1, 1)[0], cfg, cfg.methods)
    base = {c.proposer_id: c for c in cases if c.method == BASELINE}
    for c in cases:
        if c.method != BASELINE and base[c.proposer_id].n_solutions == 1:
            assert c.interactions == 0 and c.n_solutions == 1
    assert len(reports) == 2 * sum(b.n_solutions > 1 for b in base.values())


def test_aggregate_columns():
    cfg = ExperimentConfig(n_runs=2, rounds_range=(2, 10))
    cases = []
    for s in run_seeds(3, 2):
        cases += run_cases(s, cfg, ("AR_C",))[0]
    rows = aggregate(cases)
    assert [(r.method, r.m) for r in rows] == [(BASELINE, 2), (BASELINE, 10), ("AR_C", 2), ("AR_C", 10)]
    for r in rows:
        assert 0 <= r.pct_unique <= 100 and r.n_cases == 32
        assert min(r.std_or, r.std_di_hat, r.std_vw_hat) >= 0
        assert r.rmse == pytest.approx(r.rmse_demand / 1000)


def test_summary_matches_case_rows(tmp_path):
    cfg = ExperimentConfig(n_runs=3, rounds_range=(10,), output_dir=tmp_path)
    res = run_experiment("table2", cfg, plots=False)
    summary = list(csv.DictReader(open(tmp_path / "table2.csv")))
    assert [r["method"] for r in summary] == [BASELINE, "AR_SS", "AR_C"]
    cases = list(csv.DictReader(open(tmp_path / "estimates.csv")))
    pct = 100 * sum(int(c["n_solutions"]) == 1 for c in cases) / len(cases)
    assert pct == res.row(BASELINE, 10).pct_unique
    assert float(summary[0]["pct_unique"]) == pytest.approx(pct, rel=1e-5)
    reports = list(csv.DictReader(open(tmp_path / "reduction.csv")))
    assert {r["method"] for r in reports} <= {"AR_SS", "AR_C"}


def test_fig2_files(tmp_path):
    cfg = ExperimentConfig(n_runs=2, rounds_range=(1, 5), output_dir=tmp_path)
    run_experiment("fig2", cfg)
    assert (tmp_path / "fig2.png").stat().st_size > 0
    header = open(tmp_path / "fig2.csv").readline().strip().split(",")
    assert header[:5] == ["method", "m", "rmse", "rmse_demand", "pct_unique"]


def test_unknown_experiment(tmp_path):
    with pytest.raises(ValueError):
        run_experiment("fig9", ExperimentConfig(output_dir=tmp_path))


def test_unique_share_trend_is_monotone_after_smoothing(fig2_result):
    pct = np.array([fig2_result.row(BASELINE, m).pct_unique for m in range(1, 21)])
    smooth = np.convolve(pct, np.ones(3) / 3, mode="valid")
    assert np.all(np.diff(smooth) >= 0)


def test_mean_norm_mode_runs():
    cfg = ExperimentConfig(n_runs=1, rounds_range=(1, 3), norm_mode="mean_norm")
    cases, _ = run_cases(run_seeds(1, 1)[0], cfg)
    assert len(cases) == 32
