"""Consolidated self-checks used by ``qsix verify``."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .curvature import geodesic_sphere_mean_curvature, tri_laplacian_residual
from .dimension import cylinder_identity_defect, make_params, verify_factorization
from .invariants import hamiltonian_rad, pohozaev_cyl, relative_drift, energy_scale
from .shooting import find_orbit
from .transforms import cylinder_profile, log_grid, spherical_cylinder_jet, spherical_profile

DEFAULT_THRESHOLDS = {
    "factorization": 1e-12,
    "tri_laplacian_spherical": 1e-10,
    "tri_laplacian_cylinder": 1e-10,
    "conservation_drift": 1e-8,
    "spherical_pohozaev": 1e-9,
    "equator_mean_curvature": 1e-10,
}


@dataclass(frozen=True)
class Check:
    name: str
    defect: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.defect) and self.defect <= self.threshold)

    def as_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


@dataclass(frozen=True)
class VerifyReport:
    n: int
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {"n": self.n, "passed": self.passed, "failing": self.failing,
                "checks": [c.as_dict() for c in self.checks]}


def measure(n: int, drift_necksize: float = 0.7) -> dict[str, float]:
    """Measured defects, keyed like :data:`DEFAULT_THRESHOLDS`.

    The conservation check uses the Delaunay orbit of necksize
    ``drift_necksize * eps_star``, sampled along its integrated half period.
    """
    params = make_params(n)
    out = {}
    ident = verify_factorization(params)
    out["factorization"] = max(ident.max_defect, cylinder_identity_defect(params),
                               0.0 if ident.exact_zero else np.inf)

    r = log_grid(0.1, 10.0, 200)
    # extended precision: the far field cancels to ~1e-10 in double precision
    sph = spherical_profile(r, params, dtype=np.longdouble)
    out["tri_laplacian_spherical"] = tri_laplacian_residual(sph, params).max_relative
    out["tri_laplacian_cylinder"] = tri_laplacian_residual(cylinder_profile(r, params), params).max_relative

    orbit = find_orbit(params, drift_necksize * params.eps_star)
    h = hamiltonian_rad(params, orbit.half_orbit.y)
    out["conservation_drift"] = relative_drift(h, energy_scale(params, orbit))

    t = np.linspace(-5.0, 5.0, 401)
    out["spherical_pohozaev"] = abs(pohozaev_cyl(params, spherical_cylinder_jet(t, params)).p_cyl)
    out["equator_mean_curvature"] = abs(geodesic_sphere_mean_curvature(1.0, n))
    return out


def run_checks(n: int, tol: float | None = None) -> VerifyReport:
    """All checks at their default thresholds, or all at ``tol`` when given."""
    if tol is not None and not tol > 0:
        raise ValueError("tolerance must be positive")
    defects = measure(n)
    checks = [Check(name, float(defects[name]), DEFAULT_THRESHOLDS[name] if tol is None else tol)
              for name in DEFAULT_THRESHOLDS]
    return VerifyReport(n=n, checks=checks)
