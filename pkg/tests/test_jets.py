import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from qsix import jets as J

r = sp.symbols("r", positive=True)


def sym_jet(expr, x0, K):
    return np.array([float(sp.diff(expr, r, k).subs(r, x0)) for k in range(K)])


@settings(max_examples=25, deadline=None)
@given(
    b=st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3),
    c=st.floats(0.1, 2.0),
    x0=st.floats(0.2, 3.0),
)
def test_power_matches_sympy(b, c, x0):
    K = 7
    base = np.zeros((1, K))
    base[0, :3] = [1 + c * x0**2, 2 * c * x0, c]
    got = J.to_derivatives(J.power(base, b))[0]
    want = sym_jet((1 + c * r**2) ** sp.Float(b, 30), x0, K)
    np.testing.assert_allclose(got, want, rtol=1e-11, atol=1e-11 * np.max(np.abs(want)))


def test_mul_and_diff():
    x0 = 0.7
    f = sym_jet(sp.exp(r) * sp.sin(r), x0, 6)
    a = J.from_derivatives(sym_jet(sp.exp(r), x0, 6))
    b = J.from_derivatives(sym_jet(sp.sin(r), x0, 6))
    np.testing.assert_allclose(J.to_derivatives(J.mul(a, b))[0], f, rtol=1e-13)
    d = J.to_derivatives(J.diff(a))[0]
    np.testing.assert_allclose(d, sym_jet(sp.exp(r), x0, 5), rtol=1e-13)


def test_reciprocal_shift():
    got = J.to_derivatives(J.reciprocal_shift(np.array([1.5]), 5))[0]
    np.testing.assert_allclose(got, sym_jet(1 / r, 1.5, 5), rtol=1e-14)


@pytest.mark.parametrize("n", [7, 11])
def test_radial_laplacian(n):
    expr = sp.exp(-r**2) * (1 + r)
    lap = sp.diff(expr, r, 2) + (n - 1) / r * sp.diff(expr, r)
    x0 = 1.3
    c = J.from_derivatives(sym_jet(expr, x0, 6))
    got = J.to_derivatives(J.radial_laplacian(c, np.array([x0]), n))[0]
    np.testing.assert_allclose(got, sym_jet(lap, x0, 4), rtol=1e-12)


def test_laplacian_needs_two_jet():
    with pytest.raises(ValueError):
        J.radial_laplacian(np.ones((1, 2)), np.array([1.0]), 7)


def test_extended_precision_preserved():
    base = np.array([[2.0, 1.0, 0.5]], dtype=np.longdouble)
    assert J.power(base, -0.5).dtype == np.longdouble
