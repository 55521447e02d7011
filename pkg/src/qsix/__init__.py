"""Radial solutions of the sixth-order constant Q-curvature equation."""

from .dimension import DimensionParams, DomainError, make_params, verify_factorization
from .integrator import CylState, IntegrationError, Trajectory, find_event, integrate
from .invariants import (
    fit_asymptote,
    hamiltonian_rad,
    hamiltonian_rescaled,
    necksize_from_pohozaev,
    pohozaev_cyl,
)
from .shooting import DelaunayOrbit, ShootingError, continuation_sweep, find_orbit, shoot_residual
from .transforms import (
    RadialProfile,
    emden_fowler_forward,
    emden_fowler_inverse,
    scaling_law,
    spherical_profile,
    spherical_solution,
)

__version__ = "0.1.0"
