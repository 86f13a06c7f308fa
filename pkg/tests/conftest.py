import numpy as np
import pytest

from repcount.matrix_io import FeatureMatrix

SEED = 20201


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def rank_one(s, dim=6, seed=0, offset=True):
    """F[i][j] = s[i] * v[j] + c[j] with a unit v; returns (matrix, v)."""
    r = np.random.default_rng(seed)
    v = r.standard_normal(dim)
    v /= np.linalg.norm(v)
    c = r.standard_normal(dim) if offset else np.zeros(dim)
    return FeatureMatrix(np.outer(s, v) + c), v


def sinusoid(cycles, n, phase=0.0):
    return np.sin(2 * np.pi * cycles * np.arange(n) / n + phase)


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "acceptance" not in report.keywords:
        return
    _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
