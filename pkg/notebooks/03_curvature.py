"""
Curvature of radial conformal factors
=====================================

Second- and fourth-order curvatures of ``u^(4/(n-6)) delta`` for the
spherical and cylindrical solutions, the two evaluations of the
bi-Laplacian of ``u^((n-4)/(n-6))``, and Modica-type margins along a
Delaunay profile.
"""

# %%
import numpy as np

from qsix import find_orbit, make_params
from qsix.curvature import (
    geodesic_sphere_mean_curvature,
    modica_quantities,
    q4_curvature_radial,
    scalar_curvature_radial,
)
from qsix.transforms import cylinder_profile, delaunay_profile, log_grid, spherical_profile

p = make_params(7)
r = log_grid(0.1, 10.0, 200)

# %%
sph = spherical_profile(r, p)
q2 = scalar_curvature_radial(sph, p)
q4 = q4_curvature_radial(sph, p)
print(f"round sphere: Q2 = {q2.values[0]:.12f} (n(n-1) = 42), spread {q2.spread():.1e}")
print(f"round sphere: Q4 = {q4.report.values[0]:.12f} (n(n^2-4)/8 = 39.375)")
print(f"expansion vs direct {q4.route_defect:.1e}; quoted expansion vs direct {q4.printed_defect:.1e}")

# %%
cyl = scalar_curvature_radial(cylinder_profile(r, p), p)
print(f"cylinder: Q2 = {cyl.values[0]:.12f}, spread {cyl.spread():.1e}")

# %%
# Margins are only reported; no sign is claimed.
orbit = find_orbit(p, 0.7 * p.eps_star)
rep = modica_quantities(delaunay_profile(orbit, 0.0, r, order=4), p)
for k, v in rep.summary().items():
    print(f"{k:>18s} {v: .6e}")

# %%
for x in (0.5, 1.0, 3.0, 4.0):
    print(f"H(|x| = {x}) = {geodesic_sphere_mean_curvature(x, 7):+.6f}")
