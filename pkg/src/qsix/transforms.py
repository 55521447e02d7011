"""Radial profiles and the Emden-Fowler change of variables.

A radial conformal factor ``u(r)`` on the punctured ball corresponds to a
function ``v(t) = r**gamma * u(r)`` on the cylinder with ``t = -ln r``.
Derivative jets are carried through the change of variables exactly, via
the falling-factorial form of ``r^k d^k/dr^k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.polynomial import polynomial as P

from . import jets as J
from .dimension import DimensionParams, DomainError

if TYPE_CHECKING:
    from .shooting import DelaunayOrbit


@dataclass(frozen=True)
class RadialProfile:
    """Samples of a positive radial function ``u`` on increasing radii.

    ``jets`` has shape ``(N, m)`` with ``jets[:, k-1] = u^(k)(r)``.
    """

    grid: np.ndarray
    values: np.ndarray
    n: int
    jets: np.ndarray | None = None

    def __post_init__(self):
        grid = J._real(self.grid)
        values = J._real(self.values)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if np.any(grid <= 0):
            raise DomainError("radii must be positive")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(values <= 0):
            raise DomainError("profile values must be positive")
        if self.jets is not None:
            jt = J._real(self.jets)
            if jt.ndim == 1:
                jt = jt[:, None]
            if jt.shape[0] != grid.size:
                raise ValueError("jets must have one row per grid node")
            object.__setattr__(self, "jets", jt)

    @property
    def order(self) -> int:
        return 0 if self.jets is None else self.jets.shape[1]

    def derivatives(self, order: int) -> np.ndarray:
        """Array ``(N, order+1)`` of ``u, u', ..., u^(order)``."""
        if order > self.order:
            raise ValueError(f"profile carries derivatives up to order {self.order}, need {order}")
        cols = [self.values[:, None]]
        if order:
            cols.append(self.jets[:, :order])
        return np.hstack(cols)


@dataclass(frozen=True)
class CylinderProfile:
    """Samples of ``v`` at cylinder times ``t``; ``jets[:, k-1] = v^(k)(t)``."""

    t: np.ndarray
    values: np.ndarray
    n: int
    jets: np.ndarray | None = None

    @property
    def order(self) -> int:
        return 0 if self.jets is None else self.jets.shape[1]


def _chain_matrix(gamma: float, K: int) -> np.ndarray:
    """``A`` with ``r^(gamma+k) u^(k) = sum_m A[k, m] v^(m)``.

    Row ``k`` holds the coefficients of ``prod_{j<k} (x - gamma - j)`` with
    ``x^m`` weighted by ``(-1)^m`` for ``d/ds = -d/dt``.
    """
    A = np.zeros((K + 1, K + 1))
    poly = np.array([1.0])
    for k in range(K + 1):
        A[k, : poly.size] = poly * (-1.0) ** np.arange(poly.size)
        poly = P.polymul(poly, [-gamma - k, 1.0])
    return A


def emden_fowler_forward(profile: RadialProfile, params: DimensionParams) -> CylinderProfile:
    """Map ``u(r)`` to ``v(t) = r^gamma u(r)``, ``t = -ln r``, jets included."""
    r = profile.grid
    g = params.gamma
    t = -np.log(r)
    if profile.jets is None:
        return CylinderProfile(t=t, values=r**g * profile.values, n=params.n)
    K = profile.order
    A = _chain_matrix(g, K)
    d = profile.derivatives(K)
    k = np.arange(K + 1)
    scaled = d * r[:, None] ** (g + k)
    v = np.linalg.solve(A, scaled.T).T
    return CylinderProfile(t=t, values=v[:, 0], n=params.n, jets=v[:, 1:])


def emden_fowler_inverse(cyl: CylinderProfile, params: DimensionParams) -> RadialProfile:
    """Map ``v(t)`` back to ``u(r) = r^(-gamma) v(-ln r)``.

    The output grid is sorted by increasing radius.
    """
    t = np.asarray(cyl.t, dtype=float)
    r = np.exp(-t)
    g = params.gamma
    order = np.argsort(r)
    r = r[order]
    vals = np.asarray(cyl.values, dtype=float)[order]
    if cyl.jets is None:
        return RadialProfile(grid=r, values=r ** (-g) * vals, n=params.n)
    K = cyl.order
    A = _chain_matrix(g, K)
    v = np.hstack([vals[:, None], np.asarray(cyl.jets, dtype=float)[order]])
    k = np.arange(K + 1)
    d = (A @ v.T).T * r[:, None] ** (-(g + k))
    return RadialProfile(grid=r, values=d[:, 0], n=params.n, jets=d[:, 1:])


def scaling_law(profile: RadialProfile, lam: float, params: DimensionParams) -> RadialProfile:
    """``u_lam(r) = lam^gamma u(lam r)``, sampled at ``r_i / lam``.

    The returned grid is the input grid divided by ``lam``, so node ``i`` of
    the result reads the input at node ``i``.
    """
    if not lam > 0:
        raise DomainError(f"scaling factor must be positive, got {lam}")
    g = params.gamma
    grid = profile.grid / lam
    vals = lam**g * profile.values
    jets = None
    if profile.jets is not None:
        k = np.arange(1, profile.order + 1)
        jets = profile.jets * lam ** (g + k)
    return RadialProfile(grid=grid, values=vals, n=params.n, jets=jets)


def spherical_solution(distance, eps: float, params: DimensionParams):
    """The bubble ``(2 eps / (1 + eps^2 d^2))^gamma`` at distance ``d`` from its center."""
    if not eps > 0:
        raise DomainError(f"bubble parameter must be positive, got {eps}")
    d = np.asarray(distance, dtype=float)
    out = (2.0 * eps / (1.0 + eps**2 * d**2)) ** params.gamma
    return float(out) if out.ndim == 0 else out


def spherical_profile(grid, params: DimensionParams, order: int = 6, eps: float = 1.0,
                      dtype=np.float64) -> RadialProfile:
    """Bubble centered at the origin, with exact jets up to ``order``.

    ``eps = 1`` is the standard spherical solution ``((1 + r^2)/2)^(-gamma)``.
    Pass ``dtype=np.longdouble`` to carry the jets in extended precision,
    e.g. for residuals whose evaluation cancels in the far field.
    """
    r = np.asarray(grid, dtype=dtype)
    K = order + 1
    base = np.zeros((r.size, K), dtype=dtype)
    # (1 + eps^2 (r+h)^2) / (2 eps), expanded in h
    base[:, 0] = (1.0 + eps**2 * r**2) / (2.0 * eps)
    if K > 1:
        base[:, 1] = eps * r
    if K > 2:
        base[:, 2] = eps / 2.0
    d = J.to_derivatives(J.power(base, -_exact(params, "gamma", dtype)))
    return RadialProfile(grid=r, values=d[:, 0], n=params.n, jets=d[:, 1:] if order else None)


def _exact(params: DimensionParams, name: str, dtype):
    """A constant as ``dtype``, from its rational value when available."""
    q = params.exact.get(name)
    if q is None:
        return dtype(getattr(params, name))
    return dtype(q.numerator) / dtype(q.denominator)


def power_profile(grid, coeff: float, exponent: float, params: DimensionParams, order: int = 6,
                  dtype=np.float64) -> RadialProfile:
    """``coeff * r^exponent`` with exact derivatives (falling factorials)."""
    r = np.asarray(grid, dtype=dtype)
    cols = []
    fall = 1.0
    for k in range(order + 1):
        cols.append(coeff * fall * r ** (exponent - k))
        fall *= exponent - k
    d = np.column_stack(cols)
    return RadialProfile(grid=r, values=d[:, 0], n=params.n, jets=d[:, 1:] if order else None)


def cylinder_profile(grid, params: DimensionParams, order: int = 6) -> RadialProfile:
    """The singular solution ``eps_star * r^(-gamma)``."""
    return power_profile(grid, params.eps_star, -params.gamma, params, order)


def spherical_cylinder_jet(t, params: DimensionParams, order: int = 5) -> np.ndarray:
    """Derivatives ``v, v', ..., v^(order)`` of ``(cosh t)^(-gamma)``, shape ``(N, order+1)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    K = order + 1
    k = np.arange(K)
    fact = J._factorials(K)
    # cosh(t+h) = cosh t cosh h + sinh t sinh h
    even = (k % 2 == 0) / fact
    odd = (k % 2 == 1) / fact
    base = np.cosh(t)[:, None] * even + np.sinh(t)[:, None] * odd
    return J.to_derivatives(J.power(base, -params.gamma))


def delaunay_profile(orbit: "DelaunayOrbit", T: float, grid, order: int = 6) -> RadialProfile:
    """Radial conformal factor ``r^(-gamma) v(ln r + T)`` of a Delaunay orbit.

    Since the orbit is even, ``v(ln r + T) = v(t - T)`` with ``t = -ln r``;
    jets come from the orbit's dense output and the vector field.
    """
    if not orbit.converged:
        raise ValueError("orbit did not converge; refusing to build a profile from it")
    from .dimension import make_params

    params = make_params(orbit.n)
    r = np.asarray(grid, dtype=float)
    t = -np.log(r)
    jet = orbit.jet(t - T, order=order)
    cyl = CylinderProfile(t=t, values=jet[:, 0], n=orbit.n, jets=jet[:, 1:] if order else None)
    return emden_fowler_inverse(cyl, params)


def log_grid(r_min: float, r_max: float, num: int) -> np.ndarray:
    """Logarithmically spaced radii, uniform in cylinder time."""
    return np.geomspace(r_min, r_max, num)
