import pytest

from ugprofile.experiments import ExperimentConfig, experiment_estimation, experiment_reduction

# Sub-check lines gathered by acceptance tests, keyed by criterion number.
_CHECKS: dict[int, list[str]] = {}
_OUTCOMES: dict[int, str] = {}


class CriterionLog:
    def __init__(self, number: int):
        self.number = number
        self.failed: list[str] = []
        _CHECKS.setdefault(number, [])

    def check(self, label: str, ok: bool, detail: str = "") -> bool:
        line = f"  [{'ok' if ok else 'FAIL'}] {label}" + (f"  ({detail})" if detail else "")
        _CHECKS[self.number].append(line)
        if not ok:
            self.failed.append(label)
        return ok

    def finish(self) -> None:
        assert not self.failed, f"criterion {self.number} failed: {', '.join(self.failed)}"


@pytest.fixture
def criterion(request):
    number = request.node.get_closest_marker("criterion").args[0]
    return CriterionLog(number)


@pytest.fixture(scope="session")
def fig2_result():
    """Estimation-only experiment, 100 runs, m = 1..20, master seed 1."""
    return experiment_estimation(ExperimentConfig(n_runs=100, master_seed=1))


@pytest.fixture(scope="session")
def table2_result():
    """All three reduction methods at m = 10, 100 runs, master seed 1."""
    cfg = ExperimentConfig(n_runs=100, master_seed=1, rounds_range=(10,),
                           methods=("AR_SS", "AR_C", "AR_DIRECT"))
    return experiment_reduction(cfg)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for mark in getattr(report, "keywords", {}):
        if mark.startswith("test_criterion_"):
            n = int(mark.split("_")[2])
            _OUTCOMES[n] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        tr.write_line(f"criterion {n:>2}: {_OUTCOMES[n]}")
        for line in _CHECKS.get(n, []):
            tr.write_line(line)
