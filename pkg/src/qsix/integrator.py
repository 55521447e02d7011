"""Adaptive integration of the sixth-order radial ODE on the cylinder.

The equation

    -v'''''' + K4 v'''' - K2 v'' + K0 v = cn v^p

is integrated as a first-order system in the jet ``(v, v', ..., v^(5))``
with the explicit Dormand-Prince 8(5,3) pair from scipy, stepped manually so
that terminal events, the positivity guard and the per-step dense output
stay under our control.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .dimension import DimensionParams, DomainError

DEFAULT_TOL = (1e-12, 1e-10)  # (abs, rel)
BLOWUP = 1e8
DEGENERATE_AMPLITUDE = 1e-14

# DOP853 evaluates the vector field 12 times per step attempt
_EVALS_PER_ATTEMPT = 12


class IntegrationError(RuntimeError):
    """The step size underflowed; ``last_state`` is the last accepted state."""

    def __init__(self, message: str, last_state: "CylState"):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class CylState:
    t: float
    jet: np.ndarray

    def __post_init__(self):
        jet = np.asarray(self.jet, dtype=float).reshape(6)
        if not np.all(np.isfinite(jet)):
            raise ValueError("state entries must be finite")
        object.__setattr__(self, "jet", jet)

    @property
    def v(self) -> float:
        return float(self.jet[0])


def sixth_derivative(params: DimensionParams, y: np.ndarray) -> np.ndarray:
    """``v^(6)`` from the jet, vectorized over a trailing or leading axis of 6."""
    y = np.asarray(y, dtype=float)
    v, v2, v4 = y[..., 0], y[..., 2], y[..., 4]
    # odd extension of v^p keeps the field smooth through v = 0; the
    # positivity guard stops integrations there
    nonlin = params.cn * np.abs(v) ** (params.p - 1.0) * v
    return params.K4 * v4 - params.K2 * v2 + params.K0 * v - nonlin


def rhs(params: DimensionParams, state: CylState) -> np.ndarray:
    """Derivative of the jet: ``(v', ..., v^(5), v^(6))``."""
    jet = state.jet if isinstance(state, CylState) else np.asarray(state, dtype=float)
    if jet[0] <= 0:
        raise DomainError(f"v must be positive, got v={jet[0]}")
    out = np.empty(6)
    out[:5] = jet[1:]
    out[5] = sixth_derivative(params, jet)
    return out


def _field(params: DimensionParams):
    K4, K2, K0, cn, pm1 = params.K4, params.K2, params.K0, params.cn, params.p - 1.0

    def f(t, y):
        v = y[0]
        return np.array([y[1], y[2], y[3], y[4], y[5],
                         K4 * y[4] - K2 * y[2] + K0 * v - cn * abs(v) ** pm1 * v])

    return f


@dataclass
class Trajectory:
    """Accepted steps of one integration, with a dense interpolant per step.

    ``status`` is ``"completed"``, ``"positivity"`` (v reached 0),
    ``"blow-up"`` (jet left the ball of radius ``BLOWUP``) or ``"event"``
    (a terminal event fired; its time is ``event_time``).
    """

    t: np.ndarray
    y: np.ndarray
    pieces: list = field(repr=False)
    status: str = "completed"
    event_time: float | None = None
    steps: int = 0
    rejections: int = 0
    nfev: int = 0

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def direction(self) -> float:
        return 1.0 if self.t[-1] >= self.t[0] else -1.0

    def __call__(self, tq) -> np.ndarray:
        """Interpolated jets at ``tq``; shape ``(6,)`` or ``(M, 6)``."""
        tq_arr = np.atleast_1d(np.asarray(tq, dtype=float))
        lo, hi = min(self.t[0], self.t[-1]), max(self.t[0], self.t[-1])
        if np.any(tq_arr < lo - 1e-12) or np.any(tq_arr > hi + 1e-12):
            raise ValueError(f"query outside trajectory span [{lo}, {hi}]")
        out = np.empty((tq_arr.size, 6))
        s = self.direction
        knots = s * self.t
        idx = np.clip(np.searchsorted(knots, s * tq_arr, side="left") - 1, 0, len(self.pieces) - 1)
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = self.pieces[i](tq_arr[mask]).T
        return out[0] if np.ndim(tq) == 0 else out

    def states(self) -> list[CylState]:
        return [CylState(float(ti), yi) for ti, yi in zip(self.t, self.y)]

    def stats(self) -> dict:
        return {"steps": self.steps, "rejections": self.rejections, "nfev": self.nfev,
                "status": self.status, "t_start": self.t_start, "t_end": self.t_end}


def integrate(
    params: DimensionParams,
    initial: CylState,
    t_end: float,
    tolerances: tuple[float, float] = DEFAULT_TOL,
    *,
    terminal: Callable[[float, np.ndarray], float] | None = None,
    terminal_after: float | None = None,
    terminal_direction: int = 0,
    blowup: float = BLOWUP,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate from ``initial`` to ``t_end`` (either direction).

    ``terminal`` is an optional scalar function of ``(t, jet)``; the first
    sign change strictly past ``terminal_after`` stops the integration at the
    refined root.  ``terminal_direction`` selects rising (+1), falling (-1)
    or either (0) crossings.  Reaching ``v = 0`` or ``|jet| > blowup`` stops
    with the corresponding status.
    """
    atol, rtol = tolerances
    if not (atol > 0 and rtol > 0):
        raise ValueError("tolerances must be positive")
    if initial.jet[0] <= 0:
        raise DomainError(f"initial v must be positive, got {initial.jet[0]}")

    fun = _field(params)
    t0 = float(initial.t)
    s = 1.0 if t_end >= t0 else -1.0
    after = t0 if terminal_after is None else terminal_after
    solver = DOP853(fun, t0, initial.jet.copy(), t_end, rtol=rtol, atol=atol, max_step=max_step)

    ts, ys, pieces = [t0], [initial.jet.copy()], []
    steps = rejections = 0
    status = "completed"
    event_time = None
    g_prev = terminal(t0, initial.jet) if terminal is not None else None

    while solver.status == "running":
        nfev0 = solver.nfev
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integration failed at t={solver.t}: {msg}",
                                   CylState(ts[-1], ys[-1]))
        attempts = max(1, (solver.nfev - nfev0) // _EVALS_PER_ATTEMPT)
        rejections += attempts - 1
        steps += 1
        dense = solver.dense_output()
        t_new, y_new = solver.t, solver.y.copy()
        t_old = solver.t_old

        stop_t, stop_status = None, None
        if y_new[0] <= 0:
            stop_t = brentq(lambda x: dense(x)[0], t_old, t_new, xtol=1e-14)
            stop_status = "positivity"
        elif not np.all(np.isfinite(y_new)) or np.max(np.abs(y_new)) > blowup:
            stop_t, stop_status = t_new, "blow-up"

        if terminal is not None:
            g_new = terminal(t_new, y_new)
            root = _terminal_root(terminal, dense, t_old, t_new, g_prev, g_new, after, s, terminal_direction)
            if root is not None and (stop_t is None or s * root < s * stop_t):
                stop_t, stop_status = root, "event"
            g_prev = g_new

        pieces.append(dense)
        if stop_t is not None:
            ts.append(float(stop_t))
            ys.append(dense(stop_t))
            status = stop_status
            if status == "event":
                event_time = float(stop_t)
            break
        ts.append(t_new)
        ys.append(y_new)

    return Trajectory(
        t=np.array(ts),
        y=np.array(ys),
        pieces=pieces,
        status=status,
        event_time=event_time,
        steps=steps,
        rejections=rejections,
        nfev=solver.nfev,
    )


def _terminal_root(g, dense, t_old, t_new, g_old, g_new, after, s, direction):
    if s * t_new <= s * after:
        return None
    lo = t_old
    if s * t_old < s * after:
        lo = after
        g_old = g(lo, dense(lo))
    if g_old == 0.0 or np.sign(g_old) == np.sign(g_new):
        return None
    if direction > 0 and not g_old < 0 < g_new:
        return None
    if direction < 0 and not g_old > 0 > g_new:
        return None
    return brentq(lambda x: g(x, dense(x)), lo, t_new, xtol=1e-14, rtol=4 * np.finfo(float).eps)


EventSpec = Union[str, Callable[[float, np.ndarray], float]]


@dataclass(frozen=True)
class EventResult:
    times: np.ndarray
    degenerate: bool = False


def _event_scalar(event: EventSpec):
    if callable(event):
        return event, 0
    if event == "v1-zero":
        return (lambda t, y: y[..., 1]), 0
    if event == "v-min":
        return (lambda t, y: y[..., 1]), 1
    if event == "v-max":
        return (lambda t, y: y[..., 1]), -1
    raise ValueError(f"unknown event {event!r}")


def find_event(
    trajectory: Trajectory,
    event: EventSpec,
    t_range: tuple[float, float] | None = None,
    subdivisions: int = 8,
) -> EventResult:
    """All sign changes of an event scalar along the dense output, in time order.

    Each step is sampled at ``subdivisions`` interior points to catch close
    pairs of roots; every bracket is refined with Brent's method to 1e-12.
    ``"v-min"``/``"v-max"`` keep only rising/falling zeros of ``v'``.  A
    scalar whose amplitude stays below 1e-14 is reported as degenerate.
    """
    g, direction = _event_scalar(event)
    knots = np.sort(trajectory.t)
    lo, hi = knots[0], knots[-1]
    if t_range is not None:
        lo, hi = max(lo, t_range[0]), min(hi, t_range[1])
    frac = np.linspace(0.0, 1.0, subdivisions + 2)[:-1]
    samples = (knots[:-1, None] + np.diff(knots)[:, None] * frac).ravel()
    samples = np.concatenate([samples, [knots[-1]]])
    samples = samples[(samples >= lo) & (samples <= hi)]
    samples = np.unique(np.concatenate([[lo], samples, [hi]]))
    vals = np.array([g(ti, yi) for ti, yi in zip(samples, trajectory(samples))])
    if np.max(np.abs(vals)) < DEGENERATE_AMPLITUDE:
        return EventResult(times=np.array([]), degenerate=True)

    scalar = lambda x: g(x, trajectory(x))
    roots = []
    for a, b, ga, gb in zip(samples[:-1], samples[1:], vals[:-1], vals[1:]):
        if ga == 0.0:
            if direction == 0 or _crossing_ok(vals, samples, a, direction):
                roots.append(a)
            continue
        if np.sign(ga) == np.sign(gb) or gb == 0.0:
            continue
        if direction > 0 and not ga < 0:
            continue
        if direction < 0 and not ga > 0:
            continue
        roots.append(brentq(scalar, a, b, xtol=1e-12, rtol=4 * np.finfo(float).eps))
    if vals[-1] == 0.0 and direction == 0:
        roots.append(samples[-1])
    return EventResult(times=np.array(sorted(set(roots))))


def _crossing_ok(vals, samples, a, direction):
    i = int(np.searchsorted(samples, a))
    before = vals[i - 1] if i > 0 else None
    after = vals[i + 1] if i + 1 < len(vals) else None
    if before is None or after is None:
        return False
    return (before < 0 < after) if direction > 0 else (before > 0 > after)
