"""Periodic (Delaunay) solutions of the cylinder ODE by symmetric shooting.

An orbit is parametrized by its necksize ``eps0 = min v``.  Starting from
the even jet ``(eps0, 0, eps2, 0, eps4, 0)`` at a minimum, the solution is
integrated to the next critical point ``t*``; if the odd derivatives
``v'''`` and ``v^(5)`` also vanish there, reversibility makes the solution
even about ``t*`` as well, hence periodic with period ``2 t*``.

The residual map is extremely sensitive (the linearization has real
exponents around +-4 on top of the oscillation), so Newton is only run
after a collocation predictor on the half period has put the iterate into
its basin of attraction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_bvp

from .dimension import DimensionParams, DomainError, make_params
from .integrator import (
    DEGENERATE_AMPLITUDE,
    CylState,
    IntegrationError,
    Trajectory,
    integrate,
    sixth_derivative,
)

log = logging.getLogger(__name__)

SHOOT_TOL = (1e-15, 1e-13)  # (abs, rel) for shooting integrations
T_MIN = 1e-3
RESIDUAL_TOL = 1e-9
JAC_STEP = 1e-9
MAX_ITER = 50
POLISH_WINDOW = 1e3
POLISH_REACH = 8

_REFLECT = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])


class ShootingError(RuntimeError):
    """Shooting failed; ``kind`` is ``"no-critical-point"``, ``"non-convergence"``
    or ``"predictor"``, and ``best`` holds the best ``(eps2, eps4, residual)``
    seen, when there is one."""

    def __init__(self, kind: str, message: str, best=None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.best = best


@dataclass(frozen=True)
class ShotResult:
    residual: np.ndarray
    half_time: float
    trajectory: Trajectory | None
    degenerate: bool = False

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.residual))


def _check_necksize(params: DimensionParams, eps0: float, allow_top: bool = True) -> None:
    top = params.eps_star * (1 + 1e-12)
    if not (0 < eps0 <= top if allow_top else 0 < eps0 < params.eps_star):
        raise DomainError(
            f"necksize must lie in (0, eps_star] = (0, {params.eps_star!r}], got {eps0!r}"
        )


def _is_top(params: DimensionParams, eps0: float) -> bool:
    return abs(eps0 - params.eps_star) <= 1e-12 * params.eps_star


def shoot_residual(
    params: DimensionParams,
    eps0: float,
    eps2: float,
    eps4: float,
    *,
    t_min: float = T_MIN,
    t_max: float = 60.0,
    tolerances: tuple[float, float] = SHOOT_TOL,
) -> ShotResult:
    """Odd derivatives ``(v''', v^(5))`` at the first critical point past ``t_min``.

    Returns a degenerate result (zero residual, ``half_time`` NaN) when the
    jet is indistinguishable from the constant solution.
    """
    _check_necksize(params, eps0)
    deviation = max(abs(eps0 - params.eps_star), abs(eps2), abs(eps4))
    if deviation < DEGENERATE_AMPLITUDE:
        return ShotResult(residual=np.zeros(2), half_time=float("nan"), trajectory=None, degenerate=True)

    start = CylState(0.0, [eps0, 0.0, eps2, 0.0, eps4, 0.0])
    traj = integrate(params, start, t_max, tolerances,
                     terminal=lambda t, y: y[1], terminal_after=t_min)
    if traj.status != "event":
        raise ShootingError(
            "no-critical-point",
            f"v' has no zero in ({t_min}, {traj.t_end:.6g}] (integration status {traj.status})",
        )
    y = traj.y[-1]
    return ShotResult(residual=np.array([y[3], y[5]]), half_time=traj.event_time, trajectory=traj)


def linear_frequency(params: DimensionParams) -> float:
    """Angular frequency of small oscillations about the constant solution.

    ``omega^2`` is the positive root of
    ``s^3 + K4 s^2 + K2 s - (p-1) K0 = 0``.
    """
    roots = np.roots([1.0, params.K4, params.K2, -(params.p - 1.0) * params.K0])
    pos = [r.real for r in roots if abs(r.imag) < 1e-12 * max(1.0, abs(r)) and r.real > 0]
    if len(pos) != 1:
        raise ArithmeticError(f"expected exactly one positive root, got {roots}")
    return float(np.sqrt(pos[0]))


def linearized_period(params: DimensionParams) -> float:
    return 2.0 * np.pi / linear_frequency(params)


def linearized_orbit_guess(params: DimensionParams, eps0: float) -> tuple[float, float, float]:
    """Small-amplitude ``(eps2, eps4, period)`` for necksize ``eps0``.

    ``v ~ eps_star - a cos(omega t)`` with ``a = eps_star - eps0``, so the
    minimum at ``t = 0`` has ``v'' = a omega^2 > 0``.
    """
    if not 0 < eps0 <= params.eps_star * (1 + 1e-12):
        raise DomainError(f"necksize must lie in (0, eps_star], got {eps0!r}")
    w = linear_frequency(params)
    a = max(params.eps_star - eps0, 0.0)
    return a * w**2, -a * w**4, 2.0 * np.pi / w


@dataclass(frozen=True)
class DelaunayOrbit:
    """A converged periodic solution, minimum at ``t = 0``.

    ``half_orbit`` is the integrated solution on ``[0, half_time]``; the
    second half of the period is its mirror image about ``half_time`` and
    the orbit extends to all ``t`` by periodicity.
    """

    n: int
    eps0: float
    eps2: float
    eps4: float
    period: float
    half_time: float
    energy: float
    residual: float
    half_orbit: Trajectory | None = field(default=None, repr=False)
    converged: bool = True
    constant: bool = False
    iterations: int = 0

    def jet(self, t, order: int = 5) -> np.ndarray:
        """Jets ``v, ..., v^(order)`` (``order <= 6``) at times ``t``, shape ``(M, order+1)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.constant:
            y = np.zeros((t.size, 6))
            y[:, 0] = self.eps0
        else:
            tau = np.mod(t, self.period)
            first = tau <= self.half_time
            y = np.empty((t.size, 6))
            if np.any(first):
                y[first] = self.half_orbit(tau[first]).reshape(-1, 6)
            if np.any(~first):
                y[~first] = self.half_orbit(self.period - tau[~first]).reshape(-1, 6) * _REFLECT
        if order <= 5:
            return y[:, : order + 1]
        v6 = sixth_derivative(make_params(self.n), y)
        return np.column_stack([y, v6])

    def __call__(self, t) -> np.ndarray:
        return self.jet(t, order=5)

    def sample(self, num: int = 400, periods: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
        """Uniform samples ``(t, jets)`` over ``periods`` periods from ``t = 0``."""
        t = np.linspace(0.0, periods * self.period, num)
        return t, self.jet(t)

    def minimum(self, num: int = 4001) -> float:
        """Minimum of ``v`` over one period, from the dense output."""
        if self.constant:
            return self.eps0
        tau = np.linspace(0.0, self.half_time, num)
        return float(np.min(self.half_orbit(tau)[:, 0]))

    def periodicity_defect(self) -> float:
        """Mismatch between the orbit's jet at one period and at ``t = 0``.

        The continuation past ``half_time`` is the mirror image, so the jet
        at ``period`` equals the jet at 0 exactly when the odd entries vanish
        at ``half_time``; the defect is the jump this construction incurs
        there, relative to ``max(1, |jet|)``.
        """
        if self.constant:
            return 0.0
        y = self.half_orbit.y[-1]
        jump = np.max(np.abs(y - y * _REFLECT))
        return float(jump / max(1.0, np.max(np.abs(y))))

    def direct_periodicity_defect(self, tolerances: tuple[float, float] = SHOOT_TOL) -> float:
        """Same comparison, but integrating straight through one full period.

        Diagnostic only: the orbit is hyperbolic, so rounding in the initial
        jet is amplified by the Floquet multiplier (about 1e8 and up).
        """
        if self.constant:
            return 0.0
        params = make_params(self.n)
        y0 = np.array([self.eps0, 0.0, self.eps2, 0.0, self.eps4, 0.0])
        try:
            traj = integrate(params, CylState(0.0, y0), self.period, tolerances)
        except IntegrationError:
            return float("inf")
        if traj.status != "completed":
            return float("inf")
        return float(np.max(np.abs(traj.y[-1] - y0)) / max(1.0, np.max(np.abs(y0))))

    def row(self) -> dict:
        return {"n": self.n, "eps0": self.eps0, "eps2": self.eps2, "eps4": self.eps4,
                "period": self.period, "energy": self.energy, "residual": self.residual}


def constant_orbit(params: DimensionParams) -> DelaunayOrbit:
    """The cylinder solution, with the linearized period attached."""
    from .invariants import hamiltonian_rad

    e = params.eps_star
    T = linearized_period(params)
    return DelaunayOrbit(
        n=params.n, eps0=e, eps2=0.0, eps4=0.0, period=T, half_time=T / 2,
        energy=hamiltonian_rad(params, CylState(0.0, [e, 0, 0, 0, 0, 0])),
        residual=0.0, half_orbit=None, converged=True, constant=True,
    )


def _linear_mesh(params: DimensionParams, eps0: float, s: np.ndarray):
    w = linear_frequency(params)
    a = params.eps_star - eps0
    th = np.pi / w
    t = s * th
    c, sn = np.cos(w * t), np.sin(w * t)
    Y = np.array([params.eps_star - a * c, a * w * sn, a * w**2 * c,
                  -a * w**3 * sn, -a * w**4 * c, a * w**5 * sn])
    return Y, th


def _warm_mesh(params: DimensionParams, eps0: float, prev: DelaunayOrbit, s: np.ndarray):
    if prev.constant:
        return _linear_mesh(params, eps0, s)
    Y = prev.half_orbit(s * prev.half_time).T.copy()
    ratio = (params.eps_star - eps0) / (params.eps_star - prev.eps0)
    Y[0] = params.eps_star + (Y[0] - params.eps_star) * ratio
    Y[1:] *= ratio
    return Y, prev.half_time


def collocation_predictor(
    params: DimensionParams,
    eps0: float,
    warm_start: DelaunayOrbit | None = None,
    tol: float = 1e-8,
    max_nodes: int = 300_000,
) -> tuple[float, float, float]:
    """Approximate ``(eps2, eps4, half_time)`` from a collocation solve on ``[0, t*]``.

    The half period is an unknown parameter; boundary conditions are
    ``v(0) = eps0`` and vanishing odd derivatives at both ends.
    """
    K4, K2, K0, cn, pm1 = params.K4, params.K2, params.K0, params.cn, params.p - 1.0

    def fun(s, y, q):
        v = y[0]
        v6 = K4 * y[4] - K2 * y[2] + K0 * v - cn * np.abs(v) ** pm1 * v
        return q[0] * np.vstack([y[1], y[2], y[3], y[4], y[5], v6])

    def bc(ya, yb, q):
        return np.array([ya[0] - eps0, ya[1], ya[3], ya[5], yb[1], yb[3], yb[5]])

    s = np.linspace(0.0, 1.0, 61)
    if warm_start is not None:
        Y, th = _warm_mesh(params, eps0, warm_start, s)
    else:
        Y, th = _linear_mesh(params, eps0, s)
    sol = solve_bvp(fun, bc, s, Y, p=[th], tol=tol, max_nodes=max_nodes)
    if sol.status == 2 or not np.all(np.isfinite(sol.y)) or sol.p[0] <= 0:
        raise ShootingError("predictor", f"collocation failed: {sol.message}")
    if np.min(sol.y[0]) <= 0 or sol.y[2, 0] <= 0:
        raise ShootingError("predictor", "collocation converged to a non-admissible profile")
    return float(sol.y[2, 0]), float(sol.y[4, 0]), float(sol.p[0])


def _newton(params, eps0, x, *, tol, max_iter, jac_step, tolerances):
    shot = shoot_residual(params, eps0, *x, tolerances=tolerances)
    best = (x.copy(), shot)
    it = 0
    for it in range(1, max_iter + 1):
        if shot.norm <= 1e-2 * tol:
            break
        J = np.empty((2, 2))
        for j in range(2):
            h = jac_step * max(1.0, abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            J[:, j] = (shoot_residual(params, eps0, *xp, tolerances=tolerances).residual
                       - shoot_residual(params, eps0, *xm, tolerances=tolerances).residual) / (2 * h)
        try:
            dx = np.linalg.solve(J, -shot.residual)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        accepted = None
        while lam >= 2.0**-10:
            xn = x + lam * dx
            try:
                trial = shoot_residual(params, eps0, *xn, tolerances=tolerances)
            except (ShootingError, IntegrationError, DomainError):
                trial = None
            if (trial is not None and trial.norm < shot.norm
                    and 0.5 * shot.half_time < trial.half_time < 2.0 * shot.half_time):
                accepted = (xn, trial)
                break
            lam /= 2
        if accepted is None:
            break
        prev = shot.norm
        x, shot = accepted
        if shot.norm < best[1].norm:
            best = (x.copy(), shot)
        log.debug("newton eps0=%.6g it=%d lam=%g residual=%.3e", eps0, it, lam, shot.norm)
        # below tolerance and no longer contracting: the rounding floor
        if shot.norm <= 0.5 * tol and shot.norm > 0.1 * prev:
            break
    return best[0], best[1], it


def _polish(params, eps0, x, shot, tol, tolerances, reach: int = POLISH_REACH):
    """Scan representable neighbours of ``x`` a few ulps away.

    Near the bottom of Newton's descent the residual is dominated by rounding
    and step-size noise (one ulp in ``eps2`` moves it by ~1e-9 for wide
    necks), so Newton stalls; the nearby lattice usually contains a point
    below tolerance.
    """
    ulp = np.spacing(np.abs(x))
    best = (x, shot)
    offsets = sorted(((i, j) for i in range(-reach, reach + 1) for j in range(-reach, reach + 1)
                      if (i, j) != (0, 0)), key=lambda ij: (abs(ij[0]) + abs(ij[1]), ij))
    for i, j in offsets:
        xn = x + np.array([i, j]) * ulp
        try:
            trial = shoot_residual(params, eps0, *xn, tolerances=tolerances)
        except (ShootingError, IntegrationError, DomainError):
            continue
        if trial.norm < best[1].norm:
            best = (xn, trial)
            if trial.norm <= tol:
                break
    return best


def find_orbit(
    params: DimensionParams,
    eps0: float,
    initial_guess: tuple[float, float] | None = None,
    *,
    tol: float = RESIDUAL_TOL,
    max_iter: int = MAX_ITER,
    jac_step: float = JAC_STEP,
    tolerances: tuple[float, float] = SHOOT_TOL,
    warm_start: DelaunayOrbit | None = None,
) -> DelaunayOrbit:
    """Delaunay orbit of necksize ``eps0``.

    With an ``initial_guess`` Newton starts there directly and falls back to
    the collocation predictor if that does not converge.  ``warm_start`` (a
    nearby orbit) seeds the predictor; otherwise the linear mode is used,
    and if that fails the necksize is approached by continuation from the
    top of the family.
    """
    _check_necksize(params, eps0)
    if _is_top(params, eps0):
        return constant_orbit(params)

    attempts = []
    if initial_guess is not None:
        x0 = np.asarray(initial_guess, dtype=float)
        try:
            shot = shoot_residual(params, eps0, *x0, tolerances=tolerances)
        except (ShootingError, IntegrationError):
            shot = None
        if shot is not None and not shot.degenerate and shot.norm <= tol:
            return _make_orbit(params, eps0, x0, shot, 0)
        attempts.append(("guess", x0))
    attempts.append(("predictor", None))

    last_best = None
    for kind, x0 in attempts:
        if x0 is None:
            try:
                e2, e4, _ = collocation_predictor(params, eps0, warm_start)
            except ShootingError:
                if warm_start is not None:
                    raise
                e2, e4 = _predict_by_continuation(params, eps0)
            x0 = np.array([e2, e4])
        try:
            x, shot, its = _newton(params, eps0, x0, tol=tol, max_iter=max_iter,
                                   jac_step=jac_step, tolerances=tolerances)
        except (ShootingError, IntegrationError) as exc:
            log.debug("newton from %s failed: %s", kind, exc)
            continue
        if tol < shot.norm <= POLISH_WINDOW * tol:
            x, shot = _polish(params, eps0, x, shot, tol, tolerances)
        last_best = (x, shot)
        if shot.norm <= tol:
            return _make_orbit(params, eps0, x, shot, its)
    best = None if last_best is None else (*last_best[0], last_best[1].norm)
    raise ShootingError("non-convergence", f"no orbit with residual <= {tol} for eps0={eps0!r}", best)


def _predict_by_continuation(params: DimensionParams, eps0: float) -> tuple[float, float]:
    top = params.eps_star
    steps = np.arange(0.95, eps0 / top, -0.05)
    prev = None
    for r in steps:
        prev = find_orbit(params, r * top, warm_start=prev)
    e2, e4, _ = collocation_predictor(params, eps0, prev)
    return e2, e4


def _make_orbit(params, eps0, x, shot: ShotResult, iterations: int) -> DelaunayOrbit:
    from .invariants import hamiltonian_rad

    traj = shot.trajectory
    return DelaunayOrbit(
        n=params.n,
        eps0=float(eps0),
        eps2=float(x[0]),
        eps4=float(x[1]),
        period=2.0 * shot.half_time,
        half_time=shot.half_time,
        energy=hamiltonian_rad(params, CylState(0.0, traj.y[0])),
        residual=shot.norm,
        half_orbit=traj,
        converged=True,
        iterations=iterations,
    )


@dataclass
class SweepResult:
    orbits: list[DelaunayOrbit]
    grid: np.ndarray
    failed_at: float | None = None
    message: str = ""

    @property
    def complete(self) -> bool:
        return self.failed_at is None

    def period_increasing(self) -> list[bool]:
        T = [o.period for o in self.orbits]
        return [b > a for a, b in zip(T[:-1], T[1:])]

    def energy_increasing(self) -> list[bool]:
        H = [o.energy for o in self.orbits]
        return [b > a for a, b in zip(H[:-1], H[1:])]


def continuation_sweep(params: DimensionParams, eps0_grid, **kwargs) -> SweepResult:
    """Orbits along a decreasing necksize grid, each predictor warm-started
    from the previous orbit.  Stops at the first failure and returns the
    orbits found so far."""
    grid = np.asarray(eps0_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty necksize grid")
    for e in grid:
        _check_necksize(params, float(e))
    if grid.size > 1 and np.any(np.diff(grid) >= 0):
        raise ValueError("necksize grid must be strictly decreasing")
    orbits: list[DelaunayOrbit] = []
    prev = None
    for e in grid:
        try:
            orb = find_orbit(params, float(e), warm_start=prev, **kwargs)
        except (ShootingError, IntegrationError) as exc:
            return SweepResult(orbits=orbits, grid=grid, failed_at=float(e), message=str(exc))
        orbits.append(orb)
        prev = orb
    return SweepResult(orbits=orbits, grid=grid)
