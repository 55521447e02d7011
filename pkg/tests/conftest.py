import sys
import numpy as np
import pytest

from qsix import jets as J
from qsix.dimension import make_params
from qsix.shooting import continuation_sweep
from qsix.transforms import RadialProfile

SWEEP_RELS = np.round(np.arange(0.95, 0.499, -0.05), 2)


@pytest.fixture(scope="session")
def p7():
    return make_params(7)


@pytest.fixture(scope="session")
def sweep7(p7):
    return continuation_sweep(p7, p7.eps_star * SWEEP_RELS)


@pytest.fixture(scope="session")
def orbit7(sweep7):
    """The 0.7 eps_star orbit from the shared sweep."""
    return sweep7.orbits[5]


def random_profile(rng, grid, n, order=6, terms=3):
    """Sum of positive bumps ``a (1 + b r^2)^(-c)`` with exact jets."""
    r = np.asarray(grid, dtype=float)
    total = np.zeros((r.size, order + 1))
    for _ in range(terms):
        a, b, c = rng.uniform(0.5, 2.0), rng.uniform(0.2, 3.0), rng.uniform(0.2, 2.5)
        base = np.zeros((r.size, order + 1))
        base[:, 0] = 1 + b * r**2
        base[:, 1] = 2 * b * r
        if order >= 2:
            base[:, 2] = b
        total += a * J.to_derivatives(J.power(base, -c))
    return RadialProfile(grid=r, values=total[:, 0], n=n, jets=total[:, 1:] if order else None)


def assert_cols_close(actual, desired, rtol):
    """``|actual - desired| <= rtol * max|desired|`` column by column."""
    actual, desired = np.atleast_2d(actual), np.atleast_2d(desired)
    scale = np.max(np.abs(desired), axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    err = np.max(np.abs(actual - desired), axis=0) / scale
    assert np.all(err <= rtol), f"column errors {err} exceed {rtol}"


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
