"""Dimension-dependent constants of the sixth-order constant Q-curvature problem.

Everything is first built in exact rational arithmetic and only converted to
floats at the end, so the symmetric-function identities between the radial
operator coefficients and the factorization roots hold with zero defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is valid."""


@dataclass(frozen=True)
class DimensionParams:
    """All constants that depend only on the dimension ``n``.

    ``mu1 < mu2 < mu3`` are the roots of the factorization of the radial
    operator into ``(-d^2/dt^2 + mu_j)``, so that ``K4``, ``K2`` and ``K0``
    are their elementary symmetric functions.  The ``J*`` and ``L0``
    coefficients belong to the angular part of the cylinder operator and are
    kept for completeness only.
    """

    n: int
    gamma: float
    p: float
    Qn: float
    cn: float
    K0: float
    K2: float
    K4: float
    mu1: float
    mu2: float
    mu3: float
    J0: float
    J1: float
    J2: float
    J3: float
    L0: float
    eps_star: float
    omega: float
    exact: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def mu(self) -> tuple[float, float, float]:
        return (self.mu1, self.mu2, self.mu3)

    def as_dict(self) -> dict:
        """Plain float fields, in declaration order (for JSON/CSV output)."""
        return {name: getattr(self, name) for name in PARAM_FIELDS}


PARAM_FIELDS = (
    "n", "gamma", "p", "Qn", "cn", "K0", "K2", "K4", "mu1", "mu2", "mu3",
    "J0", "J1", "J2", "J3", "L0", "eps_star", "omega",
)


def _exact_constants(n: int) -> dict[str, Fraction]:
    N = Fraction(n)
    mu1 = ((N - 6) / 2) ** 2
    mu2 = ((N - 2) / 2) ** 2
    mu3 = ((N + 2) / 2) ** 2
    Qn = N * (N**4 - 20 * N**2 + 64) / 32
    return {
        "gamma": (N - 6) / 2,
        "p": (N + 6) / (N - 6),
        "Qn": Qn,
        "cn": (N - 6) / 2 * Qn,
        "K4": (3 * N**2 - 12 * N + 44) / 4,
        "K2": (3 * N**4 - 24 * N**3 + 72 * N**2 - 96 * N + 304) / 16,
        "K0": mu1 * mu2 * mu3,
        # value as printed alongside K2, K4; off from mu1*mu2*mu3 by a factor 4
        "K0_printed": (N - 6) ** 2 * (N - 2) ** 2 * (N + 2) ** 2 / 256,
        "mu1": mu1,
        "mu2": mu2,
        "mu3": mu3,
        "J0": (3 * N**4 - 18 * N**3 - 192 * N**2 + 1864 * N - 3952) / 8,
        "J1": (3 * N**3 + 3 * N**2 - 244 * N + 620) / 2,
        "J2": 2 * N**2 + 13 * N - 68,
        "J3": 2 * (N + 1),
        "L0": (3 * N**2 - 12 * N - 20) / 4,
    }


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere S^dim in R^(dim+1)."""
    k = dim + 1
    return 2.0 * math.pi ** (k / 2) / math.gamma(k / 2)


def make_params(n: int) -> DimensionParams:
    """Build the constants for dimension ``n`` (an integer, at least 7)."""
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if n < 7:
        raise DomainError(f"dimension must satisfy n >= 7, got n={n}")
    ex = _exact_constants(n)
    eps_star = cylinder_constant_exact(ex["K0"], ex["cn"], n)
    kw = {k: float(v) for k, v in ex.items() if k != "K0_printed"}
    return DimensionParams(
        n=n,
        eps_star=eps_star,
        omega=sphere_area(n - 1),
        exact=ex,
        **kw,
    )


def cylinder_constant_exact(K0, cn, n: int) -> float:
    # unique positive root of K0 v = cn v^((n+6)/(n-6))
    return float(Fraction(K0) / Fraction(cn)) ** ((n - 6) / 12)


def cylinder_constant(params: DimensionParams) -> float:
    """Value of the constant (cylindrical) solution, the maximal necksize."""
    return cylinder_constant_exact(params.exact["K0"], params.exact["cn"], params.n)


def cylinder_identity_defect(params: DimensionParams) -> float:
    """Relative defect of ``K0 e = cn e^p`` at ``e = eps_star``."""
    e = params.eps_star
    lhs = params.K0 * e
    return abs(lhs - params.cn * e**params.p) / lhs


@dataclass(frozen=True)
class IdentityReport:
    n: int
    k4_defect: float
    k2_defect: float
    k0_defect: float
    exact_zero: bool
    k0_printed: float
    k0_printed_ratio: float

    @property
    def max_defect(self) -> float:
        return max(self.k4_defect, self.k2_defect, self.k0_defect)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k4_defect": self.k4_defect,
            "k2_defect": self.k2_defect,
            "k0_defect": self.k0_defect,
            "max_defect": self.max_defect,
            "exact_zero": self.exact_zero,
            "k0_printed": self.k0_printed,
            "k0_printed_ratio": self.k0_printed_ratio,
        }


def verify_factorization(params: DimensionParams) -> IdentityReport:
    """Check K4, K2, K0 against the symmetric functions of the roots.

    Defects are relative and computed in floating point from the stored
    floats; ``exact_zero`` repeats the check in rational arithmetic.  The
    report also carries the alternative K0 normalization that differs from
    the root product by a factor 4.
    """
    m1, m2, m3 = params.mu
    k4 = abs(params.K4 - (m1 + m2 + m3)) / params.K4
    k2 = abs(params.K2 - (m1 * m2 + m1 * m3 + m2 * m3)) / params.K2
    k0 = abs(params.K0 - m1 * m2 * m3) / params.K0

    ex = params.exact
    e1, e2, e3 = ex["mu1"], ex["mu2"], ex["mu3"]
    exact_zero = (
        ex["K4"] == e1 + e2 + e3
        and ex["K2"] == e1 * e2 + e1 * e3 + e2 * e3
        and ex["K0"] == e1 * e2 * e3
    )
    return IdentityReport(
        n=params.n,
        k4_defect=k4,
        k2_defect=k2,
        k0_defect=k0,
        exact_zero=exact_zero,
        k0_printed=float(ex["K0_printed"]),
        k0_printed_ratio=float(ex["K0"] / ex["K0_printed"]),
    )
