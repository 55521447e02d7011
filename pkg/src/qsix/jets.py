"""Truncated Taylor series arithmetic, vectorized over grid nodes.

A series is an array of shape ``(N, K)`` holding normalized Taylor
coefficients ``c_k = f^(k)(x0) / k!`` at each of ``N`` expansion points.
Derivative jets (``f, f', f'', ...``) convert to and from this form with
:func:`from_derivatives` / :func:`to_derivatives`.
"""

from __future__ import annotations

from math import factorial

import numpy as np


def _factorials(K: int) -> np.ndarray:
    return np.array([float(factorial(k)) for k in range(K)])


def _real(x) -> np.ndarray:
    """As a floating array, keeping extended precision when given."""
    x = np.asarray(x)
    return x.astype(np.result_type(x.dtype, np.float64), copy=False)


def from_derivatives(d: np.ndarray) -> np.ndarray:
    d = np.atleast_2d(_real(d))
    return d / _factorials(d.shape[-1])


def to_derivatives(c: np.ndarray) -> np.ndarray:
    c = np.atleast_2d(_real(c))
    return c * _factorials(c.shape[-1])


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product truncated to the shorter of the two lengths."""
    K = min(a.shape[-1], b.shape[-1])
    out = np.zeros(np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (K,), dtype=np.result_type(a, b))
    for k in range(K):
        out[..., k] = np.einsum("...j,...j->...", a[..., : k + 1], b[..., k::-1])
    return out


def power(f: np.ndarray, b: float) -> np.ndarray:
    """``f**b`` for a series with nonzero constant term (Miller's recurrence)."""
    f = _real(f)
    K = f.shape[-1]
    f0 = f[..., 0]
    w = np.zeros_like(f)
    w[..., 0] = f0**b
    for k in range(1, K):
        j = np.arange(1, k + 1)
        coef = b * j - (k - j)
        w[..., k] = np.einsum("...j,j,...j->...", f[..., 1 : k + 1], coef, w[..., k - 1 :: -1]) / (k * f0)
    return w


def diff(c: np.ndarray) -> np.ndarray:
    """Derivative series; one order is lost."""
    K = c.shape[-1]
    return c[..., 1:] * np.arange(1, K)


def reciprocal_shift(x0: np.ndarray, K: int) -> np.ndarray:
    """Series of ``1/(x0 + h)`` in ``h``."""
    x0 = _real(x0)[..., None]
    k = np.arange(K)
    return (-1.0) ** k / x0 ** (k + 1)


def radial_laplacian(c: np.ndarray, r0: np.ndarray, n: int) -> np.ndarray:
    """Series of ``f'' + (n-1) f'/r`` about ``r0``; two orders are lost."""
    K = c.shape[-1]
    if K < 3:
        raise ValueError("need at least a 2-jet to apply the Laplacian")
    d1 = diff(c)
    d2 = diff(d1)
    inv = reciprocal_shift(r0, K - 1)
    return d2 + (n - 1) * mul(inv, d1)[..., : K - 2]

