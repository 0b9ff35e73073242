from pathlib import Path

import numpy as np
import pytest

import isobn.estimation as estimation
from isobn.io import load_network
from isobn.signs import check_isotonic

DATA = Path(__file__).parent / "data"

# (X1, X2, X3) -> (n, n1) for the three-parent example
WORKED_COUNTS = {
    (0, 0, 0): (10, 4),
    (0, 0, 1): (5, 1),
    (1, 0, 0): (18, 6),
    (1, 0, 1): (5, 4),
    (0, 1, 0): (20, 10),
    (0, 1, 1): (0, 0),
    (1, 1, 0): (5, 2),
    (1, 1, 1): (10, 4),
}


def worked_rows():
    """73 rows (X1, X2, X3, Y) realising the worked-example counts, in config order."""
    rows = []
    for (x1, x2, x3), (n, n1) in sorted(WORKED_COUNTS.items()):
        rows += [(x1, x2, x3, 1)] * n1 + [(x1, x2, x3, 0)] * (n - n1)
    return np.array(rows, dtype=np.uint8)


def worked_csv() -> str:
    return "X1,X2,X3,Y\n" + "".join(",".join(map(str, r)) + "\n" for r in worked_rows())


@pytest.fixture
def three_parent():
    return load_network(DATA / "three_parent.net")


@pytest.fixture
def worked_data_file(tmp_path):
    p = tmp_path / "worked.csv"
    p.write_text(worked_csv())
    return p


def random_dag_problem(rng, max_nodes=6, max_weight=20):
    n = int(rng.integers(1, max_nodes + 1))
    perm = rng.permutation(n)
    p_edge = rng.uniform(0.1, 0.7)
    edges = [(int(perm[i]), int(perm[j])) for i in range(n) for j in range(i + 1, n) if rng.random() < p_edge]
    g = rng.uniform(0, 1, n)
    w = rng.integers(1, max_weight + 1, n).astype(float)
    return g, w, edges


# Every fit performed anywhere in the suite is re-checked here.
FIT_LOG = {"fits": 0, "violations": []}


@pytest.fixture(autouse=True, scope="session")
def _audit_fits():
    original = estimation.fit_variable

    def audited(*args, **kwargs):
        fit = original(*args, **kwargs)
        FIT_LOG["fits"] += 1
        if not check_isotonic(fit.class_fitted, fit.order, 1e-9):
            FIT_LOG["violations"].append(fit.name)
        return fit

    estimation.fit_variable = audited
    yield
    estimation.fit_variable = original


def pytest_sessionfinish(session, exitstatus):
    if FIT_LOG["violations"]:
        print(f"\nisotonicity audit: {len(FIT_LOG['violations'])} violating fit(s): {FIT_LOG['violations']}")
        session.exitstatus = 1


ACCEPTANCE_LINES = []


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    for key, value in report.user_properties:
        if key == "criterion":
            crit = value
    if crit and report.when == "call":
        ACCEPTANCE_LINES.append(f"{'PASS' if report.passed else 'FAIL'}  {crit}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
