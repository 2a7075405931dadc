import numpy as np
import pytest

from tsfactor.panel import Panel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_basis(rng, p, r):
    """Random p x r matrix with orthonormal columns."""
    q, _ = np.linalg.qr(rng.standard_normal((p, r)))
    return q


def random_rotation(rng, r):
    q, _ = np.linalg.qr(rng.standard_normal((r, r)))
    return q


def write_csv(path, header, rows):
    lines = [",".join(header)] if header is not None else []
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def market_stand_in(p=123, T=1642, seed=6):
    """One strong serially correlated factor plus an observed market regressor."""
    rng = np.random.default_rng(seed)
    market = np.zeros(T)
    factor = np.zeros(T)
    e = rng.standard_normal((2, T))
    for t in range(1, T):
        market[t] = 0.2 * market[t - 1] + e[0, t]
        factor[t] = 0.6 * factor[t - 1] + e[1, t]
    beta = rng.uniform(0.5, 1.5, p)
    load = rng.uniform(-2, 2, p)
    y = np.outer(beta, market) + np.outer(load, factor) + rng.standard_normal((p, T))
    labels = [f"stock{i:03d}" for i in range(p)]
    return Panel(y, series_labels=labels), Panel(market[None, :], series_labels=["market"]), labels


# PASS/FAIL lines collected by the acceptance module, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
