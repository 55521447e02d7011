"""Curvature diagnostics for radial conformal factors.

All quantities refer to the conformally flat metric ``g = u^(4/(n-6)) delta``
for a positive radial ``u`` given with its derivative jets.  Laplacians of
powers of ``u`` are evaluated on truncated Taylor series about each grid
node, so no finite differences are involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets as J
from .dimension import DimensionParams, DomainError
from .transforms import RadialProfile, _exact


@dataclass(frozen=True)
class CurvatureReport:
    """Per-node values of a radial quantity.

    ``scale`` is a per-node reference magnitude, so ``values / scale`` is a
    relative quantity; it is 1 where no natural scale exists.
    """

    name: str
    grid: np.ndarray
    values: np.ndarray
    scale: np.ndarray

    @property
    def min(self) -> float:
        return float(np.min(self.values))

    @property
    def argmin(self) -> float:
        return float(self.grid[int(np.argmin(self.values))])

    @property
    def relative(self) -> np.ndarray:
        return self.values / self.scale

    @property
    def max_relative(self) -> float:
        return float(np.max(np.abs(self.relative)))

    def spread(self) -> float:
        """``max/min - 1`` of the values; 0 for a grid-constant quantity."""
        lo, hi = np.min(self.values), np.max(self.values)
        if lo <= 0:
            return float("inf") if hi != lo else 0.0
        return float(hi / lo - 1.0)

    def summary(self) -> dict:
        return {"name": self.name, "min": self.min, "argmin": self.argmin,
                "max": float(np.max(self.values)), "max_relative": self.max_relative}


def _require(profile: RadialProfile, order: int) -> np.ndarray:
    if profile.order < order:
        raise ValueError(f"profile needs derivative jets up to order {order}, has {profile.order}")
    return profile.derivatives(order)


def _report(name, profile, values, scale=None) -> CurvatureReport:
    values = np.asarray(values, dtype=float)
    scale = np.ones_like(values) if scale is None else np.abs(np.asarray(scale, dtype=float))
    return CurvatureReport(name=name, grid=profile.grid, values=values, scale=scale)


def _laplacian_power(profile: RadialProfile, b: float, times: int, n: int) -> np.ndarray:
    """``Delta^times (u^b)`` at the grid nodes, from the jets."""
    d = _require(profile, 2 * times)
    c = J.power(J.from_derivatives(d), b)
    for _ in range(times):
        c = J.radial_laplacian(c, profile.grid, n)
    return c[:, 0]


def tri_laplacian_residual(profile: RadialProfile, params: DimensionParams) -> CurvatureReport:
    """``(-Delta)^3 u - cn u^p`` on the grid, scaled by ``cn u^p``."""
    lap3 = _laplacian_power(profile, 1.0, 3, params.n)
    dt = profile.values.dtype.type
    rhs = _exact(params, "cn", dt) * profile.values ** _exact(params, "p", dt)
    return _report("tri_laplacian_residual", profile, -lap3 - rhs, rhs)


def _radial(d: np.ndarray, r: np.ndarray, n: int) -> dict:
    """Radial specializations of the invariants entering the expansions."""
    u, u1, u2 = d[:, 0], d[:, 1], d[:, 2]
    out = {"u": u, "u1": u1, "grad2": u1**2, "lap": u2 + (n - 1) * u1 / r}
    if d.shape[1] > 4:
        u3, u4 = d[:, 3], d[:, 4]
        dlap = u3 + (n - 1) * (u2 / r - u1 / r**2)
        ddlap = u4 + (n - 1) * (u3 / r - 2 * u2 / r**2 + 2 * u1 / r**3)
        out.update(
            grad_lap=u1 * dlap,
            bilap=ddlap + (n - 1) * dlap / r,
            hess2=u2**2 + (n - 1) * (u1 / r) ** 2,
            hess_grad=u2 * u1**2,
        )
    return out


def scalar_curvature_radial(profile: RadialProfile, params: DimensionParams) -> CurvatureReport:
    n = params.n
    q = _radial(_require(profile, 2), profile.grid, n)
    u = q["u"]
    vals = -(4 * (n - 1) / (n - 6)) * u ** (-(n - 2) / (n - 6)) * (q["lap"] + 4 / (n - 6) * q["grad2"] / u)
    return _report("Q2_g", profile, vals, vals)


def scalar_decomposition_defect(profile: RadialProfile, params: DimensionParams) -> float:
    """Relative mismatch between ``-Delta(u^a)``, ``a = (n-2)/(n-6)``, from the
    series and from ``a u^(4/(n-6)) (-Delta u - 4/(n-6) |grad u|^2 / u)``."""
    n = params.n
    a = (n - 2) / (n - 6)
    direct = -_laplacian_power(profile, a, 1, n)
    q = _radial(_require(profile, 2), profile.grid, n)
    u = q["u"]
    formula = a * u ** (4 / (n - 6)) * (-q["lap"] - 4 / (n - 6) * q["grad2"] / u)
    scale = np.maximum(np.abs(direct), a * u ** (4 / (n - 6)) * (np.abs(q["lap"]) + 4 / (n - 6) * q["grad2"] / u))
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(np.abs(direct - formula) / scale))


def bilaplacian_expansion(profile: RadialProfile, params: DimensionParams, printed: bool = False) -> np.ndarray:
    """``Delta^2(u^b)``, ``b = (n-4)/(n-6)``, from the chain-rule expansion.

    With ``f = u^b`` the expansion reads

        f' D2u + 4 f'' <grad u, grad Du> + 2 f'' |Hess u|^2 + f'' (Du)^2
        + 4 f''' Hess u(grad u, grad u) + 2 f''' |grad u|^2 Du + f'''' |grad u|^4.

    ``printed=True`` drops the ``(Du)^2`` term and uses ``2(n-7)(n-8)/(n-6)^4``
    for the last coefficient (a commonly quoted form); it is kept only to
    measure how far that form is from the expansion.
    """
    n = params.n
    q = _radial(_require(profile, 4), profile.grid, n)
    u = q["u"]
    b = (n - 4) / (n - 6)
    f1 = b * u ** (b - 1)
    f2 = b * (b - 1) * u ** (b - 2)
    f3 = b * (b - 1) * (b - 2) * u ** (b - 3)
    f4 = b * (b - 1) * (b - 2) * (b - 3) * u ** (b - 4)
    total = (f1 * q["bilap"] + 4 * f2 * q["grad_lap"] + 2 * f2 * q["hess2"]
             + 4 * f3 * q["hess_grad"] + 2 * f3 * q["grad2"] * q["lap"])
    if printed:
        return total + 2 * (n - 7) * (n - 8) / (n - 6) ** 4 * u ** (b - 4) * q["grad2"] ** 2
    return total + f2 * q["lap"] ** 2 + f4 * q["grad2"] ** 2


@dataclass(frozen=True)
class Q4Result:
    report: CurvatureReport
    route_a: np.ndarray
    route_b: np.ndarray
    route_printed: np.ndarray

    @property
    def route_defect(self) -> float:
        """Max relative disagreement of the expansion with direct evaluation."""
        return _rel(self.route_a, self.route_b)

    @property
    def printed_defect(self) -> float:
        return _rel(self.route_printed, self.route_b)


def _rel(a, b) -> float:
    scale = max(float(np.max(np.abs(b))), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b)) / scale)


def q4_curvature_radial(profile: RadialProfile, params: DimensionParams) -> Q4Result:
    """``Q4_g = 2/(n-4) u^(-(n+4)/(n-6)) Delta^2(u^((n-4)/(n-6)))``.

    The reported values use direct series evaluation; the expansion and its
    printed variant are returned alongside for comparison.
    """
    n = params.n
    b = (n - 4) / (n - 6)
    direct = _laplacian_power(profile, b, 2, n)
    expanded = bilaplacian_expansion(profile, params)
    printed = bilaplacian_expansion(profile, params, printed=True)
    pref = 2 / (n - 4) * profile.values ** (-(n + 4) / (n - 6))
    vals = pref * direct
    return Q4Result(report=_report("Q4_g", profile, vals, vals), route_a=pref * expanded,
                    route_b=vals, route_printed=pref * printed)


@dataclass(frozen=True)
class ModicaReport:
    q2: CurvatureReport
    q4: CurvatureReport
    margin2: CurvatureReport
    margin4: CurvatureReport

    def summary(self) -> dict:
        return {
            "min_margin_Q2": self.margin2.min, "argmin_margin_Q2": self.margin2.argmin,
            "min_margin_Q4": self.margin4.min, "argmin_margin_Q4": self.margin4.argmin,
            "min_Q2": self.q2.min, "min_Q4": self.q4.min,
        }


def modica_quantities(profile: RadialProfile, params: DimensionParams) -> ModicaReport:
    """``Q2(u) = -Du - 4/(n-6) |grad u|^2/u`` and its fourth-order analogue
    ``Q4(u) = (n-6)/(n-4) u^(-2/(n-6)) D^2(u^((n-4)/(n-6)))``, i.e. the
    expansion normalized to leading term ``D^2 u``, with margins against
    ``sqrt((n-6)/n) u^(n/(n-6))``.  Nothing is asserted about signs.
    """
    n = params.n
    q = _radial(_require(profile, 4), profile.grid, n)
    u = q["u"]
    q2 = -q["lap"] - 4 / (n - 6) * q["grad2"] / u
    q4 = (n - 6) / (n - 4) * u ** (-2 / (n - 6)) * _laplacian_power(profile, (n - 4) / (n - 6), 2, n)
    bound = np.sqrt((n - 6) / n) * u ** (n / (n - 6))
    return ModicaReport(
        q2=_report("Q2", profile, q2),
        q4=_report("Q4", profile, q4),
        margin2=_report("margin_Q2", profile, q2 - bound, bound),
        margin4=_report("margin_Q4", profile, q4 - bound, bound),
    )


def geodesic_sphere_mean_curvature(r, n: int):
    """Mean curvature (sum of principal curvatures) of ``|x| = r`` in the
    round metric ``4 (1 + |x|^2)^-2 delta``.

    For ``g = e^(2 phi) delta`` the rule ``H_g = e^(-phi) (H + (n-1) d_r phi)``
    with ``H = (n-1)/r`` gives ``(n-1)(1 - r^2)/(2r)``: positive inside the
    equator, zero on it and negative outside.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radius must be positive")
    phi_r = -2 * r / (1 + r**2)
    out = (1 + r**2) / 2 * ((n - 1) / r + (n - 1) * phi_r)
    return float(out) if out.ndim == 0 else out


def mean_curvature_by_area(r: float, n: int, h: float = 1e-4) -> float:
    """First variation of the g-area of concentric spheres per unit g-length
    of radial displacement, by central differences in ``ln r``."""
    def log_area(s):
        return (n - 1) * np.log(2 * s / (1 + s**2))

    dlog = (log_area(r * np.exp(h)) - log_area(r * np.exp(-h))) / (2 * h) / r
    # unit g-normal: ds_g = 2 dr / (1 + r^2)
    return float(dlog * (1 + r**2) / 2)
