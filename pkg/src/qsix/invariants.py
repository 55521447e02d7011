"""Conserved Hamiltonian, Pohozaev invariants and asymptote fitting.

For radial data the angular part of the cylinder Hamiltonian vanishes
identically, so the conserved density is

    H = 1/2 v3^2 + K4/2 v2^2 + K2/2 v1^2 - K0/2 v^2
        + v5 v1 - v4 v2 - K4 v3 v1 + cn (n-6)/(2n) v^(2n/(n-6))

and its integral over the cross-section sphere is the Pohozaev invariant.
Along any solution ``dH/dt = v1 * (ODE defect) = 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline, PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from .dimension import DimensionParams, DomainError
from .integrator import CylState, Trajectory
from .shooting import DelaunayOrbit, SweepResult, find_orbit
from .transforms import RadialProfile, emden_fowler_forward

log = logging.getLogger(__name__)


def _jets(state) -> np.ndarray:
    if isinstance(state, CylState):
        return state.jet
    if isinstance(state, Trajectory):
        return state.y
    if isinstance(state, DelaunayOrbit):
        if state.constant:
            return np.array([[state.eps0, 0, 0, 0, 0, 0]], dtype=float)
        return state.half_orbit.y
    return np.asarray(state, dtype=float)


def _terms(params: DimensionParams, y: np.ndarray, A: float) -> np.ndarray:
    v, v1, v2, v3, v4, v5 = (y[..., k] for k in range(6))
    if np.any(v <= 0):
        raise DomainError("Hamiltonian needs v > 0")
    n = params.n
    return np.stack([
        0.5 * v3**2,
        0.5 * params.K4 * v2**2,
        0.5 * params.K2 * v1**2,
        -0.5 * params.K0 * v**2,
        v5 * v1,
        -v4 * v2,
        -params.K4 * v3 * v1,
        A * (n - 6) / (2 * n) * v ** (2 * n / (n - 6)),
    ], axis=-1)


def hamiltonian_rescaled(params: DimensionParams, A: float, state):
    """Hamiltonian with nonlinear coefficient ``A`` in place of ``cn``.

    Accepts a :class:`CylState`, a :class:`Trajectory`, an orbit or an
    array of jets (last axis of length 6); returns a float or an array.
    """
    y = _jets(state)
    h = _terms(params, y, A).sum(axis=-1)
    return float(h) if np.ndim(h) == 0 else h


def hamiltonian_rad(params: DimensionParams, state):
    return hamiltonian_rescaled(params, params.cn, state)


def energy_scale(params: DimensionParams, state, A: float | None = None) -> float:
    """Largest single term of the Hamiltonian over the samples."""
    y = _jets(state)
    return float(np.max(np.abs(_terms(params, y, params.cn if A is None else A))))


def relative_drift(values: np.ndarray, scale: float) -> float:
    """``max |h - mean| / |mean|``, or relative to ``scale`` when the mean is
    negligible against it (e.g. on the spherical solution, where H = 0)."""
    values = np.atleast_1d(values)
    mean = float(np.mean(values))
    dev = float(np.max(np.abs(values - mean)))
    denom = abs(mean) if abs(mean) > 1e-6 * scale else scale
    return dev / denom if denom > 0 else dev


def rescaled_coefficient(params: DimensionParams, eps: float) -> float:
    """``A = eps^(12/(n-6)) cn``: ``v/eps`` solves the equation with ``cn -> A``."""
    if not eps > 0:
        raise DomainError(f"rescaling factor must be positive, got {eps}")
    return eps ** (12 / (params.n - 6)) * params.cn


def rescaled_params(params: DimensionParams, eps: float) -> DimensionParams:
    """Parameters whose nonlinear coefficient is :func:`rescaled_coefficient`;
    pass them to the integrator to solve the rescaled equation."""
    return replace(params, cn=rescaled_coefficient(params, eps))


@dataclass(frozen=True)
class PohozaevValue:
    h_rad: float
    p_cyl: float
    drift: float


def pohozaev_cyl(params: DimensionParams, trajectory) -> PohozaevValue:
    """Mean Hamiltonian density along the samples, times the area of S^(n-1)."""
    h = np.atleast_1d(hamiltonian_rad(params, trajectory))
    mean = float(np.mean(h))
    drift = relative_drift(h, energy_scale(params, trajectory))
    return PohozaevValue(h_rad=mean, p_cyl=params.omega * mean, drift=drift)


def _orbits_of(table) -> list[DelaunayOrbit]:
    if table is None:
        return []
    if isinstance(table, SweepResult):
        return list(table.orbits)
    return list(table)


def _nearest(orbits: list[DelaunayOrbit], eps0: float) -> DelaunayOrbit | None:
    if not orbits:
        return None
    return min(orbits, key=lambda o: abs(o.eps0 - eps0))


def orbit_for(params: DimensionParams, eps0: float, table=None, **kwargs) -> DelaunayOrbit:
    """Orbit of necksize ``eps0``, reused from ``table`` on an exact match and
    otherwise computed with the nearest tabulated orbit as initial guess and
    warm start."""
    orbits = _orbits_of(table)
    near = _nearest(orbits, eps0)
    if near is not None and near.eps0 == eps0:
        return near
    guess = None if near is None or near.constant else (near.eps2, near.eps4)
    return find_orbit(params, eps0, initial_guess=guess, warm_start=near, **kwargs)


def pohozaev_of_necksize(params: DimensionParams, eps0: float, table=None) -> float:
    orbit = orbit_for(params, eps0, table)
    return pohozaev_cyl(params, orbit).p_cyl


def necksize_from_pohozaev(params: DimensionParams, p_target: float, table, rtol: float = 1e-6) -> float:
    """Invert the monotone necksize -> Pohozaev map using a sweep table.

    A monotone interpolant of the table gives the starting point; the value
    is then refined by re-shooting until ``|p(eps0) - p_target| <= rtol |p_target|``.
    """
    if p_target > 0:
        raise DomainError(f"Pohozaev values of the Delaunay family are negative; got {p_target}")
    orbits = sorted(_orbits_of(table), key=lambda o: o.eps0)
    if len(orbits) < 2:
        raise ValueError("need a sweep table with at least two orbits")
    eps = np.array([o.eps0 for o in orbits])
    pv = np.array([pohozaev_cyl(params, o).p_cyl for o in orbits])
    lo, hi = pv.min(), pv.max()
    if not lo <= p_target <= hi:
        raise DomainError(f"target {p_target} outside the tabulated range [{lo}, {hi}]")
    tol = rtol * abs(p_target)
    hit = np.flatnonzero(np.abs(pv - p_target) <= tol)
    if hit.size:
        return float(eps[hit[0]])

    # eps0 increasing <=> p decreasing
    guess = float(PchipInterpolator(pv[::-1], eps[::-1])(p_target))
    k = int(np.searchsorted(-pv, -p_target))
    a, b = eps[k - 1], eps[k]
    cache: dict[float, float] = {}

    def f(e):
        if e not in cache:
            cache[e] = pohozaev_of_necksize(params, e, orbits) - p_target
        return cache[e]

    fg = f(guess)
    if abs(fg) <= tol:
        return guess
    if (fg > 0) == (pv[k - 1] - p_target > 0):
        a = guess
    else:
        b = guess
    fa, fb = pv[eps == a][0] - p_target if a in eps else f(a), pv[eps == b][0] - p_target if b in eps else f(b)

    # Illinois variant of regula falsi; stops on the value tolerance
    side = 0
    for _ in range(60):
        e = (a * fb - b * fa) / (fb - fa)
        fe = f(e)
        if abs(fe) <= tol:
            return float(e)
        if (fe > 0) == (fa > 0):
            a, fa = e, fe
            if side == -1:
                fb /= 2
            side = -1
        else:
            b, fb = e, fe
            if side == 1:
                fa /= 2
            side = 1
        if abs(b - a) <= 1e-15 * max(abs(a), abs(b)):
            return float(e)
    raise ArithmeticError("necksize inversion did not converge")


class FitError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


@dataclass(frozen=True)
class AsymptoteFit:
    eps0: float
    T: float
    residual: float
    degenerate: bool
    minima_t: np.ndarray
    minima_v: np.ndarray
    orbit: DelaunayOrbit | None = None


def _local_minima(t: np.ndarray, v: np.ndarray, v1: np.ndarray | None, v2: np.ndarray | None):
    if v1 is not None and v2 is not None:
        dv = CubicHermiteSpline(t, v1, v2)
        val = CubicHermiteSpline(t, v, v1)
    else:
        val = CubicSpline(t, v)
        dv = val.derivative()
    d = dv(t)
    tm, vm = [], []
    for i in range(len(t) - 1):
        if d[i] < 0 <= d[i + 1]:
            if d[i + 1] == 0:
                root = t[i + 1]
            else:
                root = brentq(dv, t[i], t[i + 1], xtol=1e-14)
            if tm and abs(root - tm[-1]) < 1e-12:
                continue
            tm.append(root)
            vm.append(float(val(root)))
    return np.array(tm), np.array(vm)


def fit_asymptote(
    profile: RadialProfile,
    params: DimensionParams,
    table=None,
    window: tuple[float, float] | None = None,
) -> AsymptoteFit:
    """Fit a translated Delaunay solution to a profile near the puncture.

    Only radii inside ``window = (r_lo, r_hi)`` are used.  The necksize is
    the value of the local minimum of ``v = r^gamma u`` closest to ``r = 0``;
    the phase ``T`` in ``u ~ r^(-gamma) v_eps(ln r + T)`` is aligned by
    least squares over the last period, and the returned residual is the
    relative sup-norm misfit there.
    """
    if window is not None:
        mask = (profile.grid >= window[0]) & (profile.grid <= window[1])
        jets = None if profile.jets is None else profile.jets[mask]
        profile = RadialProfile(grid=profile.grid[mask], values=profile.values[mask], n=profile.n, jets=jets)
    cyl = emden_fowler_forward(profile, params)
    order = np.argsort(cyl.t)
    t = cyl.t[order]
    v = cyl.values[order]
    v1 = v2 = None
    if cyl.order >= 2:
        v1, v2 = cyl.jets[order, 0], cyl.jets[order, 1]

    mean = float(np.mean(v))
    if (v.max() - v.min()) <= 1e-9 * mean:
        return AsymptoteFit(eps0=mean, T=float("nan"), residual=float(np.max(np.abs(v - mean)) / mean),
                            degenerate=True, minima_t=np.array([]), minima_v=np.array([]))

    tm, vm = _local_minima(t, v, v1, v2)
    if tm.size < 2:
        raise FitError("insufficient-range", f"found {tm.size} local minima of v, need at least 2")
    eps0 = float(vm[-1])
    orbit = orbit_for(params, eps0, table)
    P = orbit.period

    last = t >= t[-1] - P
    tw, vw = t[last], v[last]

    def misfit(T):
        return float(np.sum((vw - orbit.jet(tw - T)[:, 0]) ** 2))

    T0 = tm[-1] % P
    res = minimize_scalar(misfit, bounds=(T0 - 0.05 * P, T0 + 0.05 * P), method="bounded",
                          options={"xatol": 1e-13})
    T = float(res.x) % P
    if T == 0.0:
        T = P
    model = orbit.jet(tw - T)[:, 0]
    residual = float(np.max(np.abs(vw - model)) / np.max(np.abs(vw)))
    return AsymptoteFit(eps0=eps0, T=T, residual=residual, degenerate=False,
                        minima_t=tm, minima_v=vm, orbit=orbit)
