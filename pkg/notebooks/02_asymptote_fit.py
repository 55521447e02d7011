"""
Fitting a Delaunay asymptote near a puncture
============================================

Build the radial profile of a Delaunay solution, perturb it by a factor
``1 + r`` and fit the translated orbit on windows that slide toward
``r = 0``.  The misfit shrinks with the window.
"""

# %%
import numpy as np

from qsix import find_orbit, make_params
from qsix.invariants import fit_asymptote
from qsix.transforms import RadialProfile, delaunay_profile

p = make_params(7)
orbit = find_orbit(p, 0.7 * p.eps_star)
P, T = orbit.period, 1.3

# %%
# The exact profile gives back its own necksize and phase.
r = np.geomspace(np.exp(-6 * P), 1.0, 3000)
fit = fit_asymptote(delaunay_profile(orbit, T, r), p, [orbit])
print(f"eps0 {fit.eps0:.15f} (true {orbit.eps0:.15f}), T {fit.T:.12f} (true {T})")

# %%
r = np.geomspace(np.exp(-7 * P), 1.0, 4000)
u = delaunay_profile(orbit, T, r, order=0).values * (1 + r)
pert = RadialProfile(grid=r, values=u, n=7)
for k in range(1, 5):
    w = (np.exp(-(k + 2) * P), np.exp(-k * P))
    f = fit_asymptote(pert, p, [orbit], window=w)
    print(f"window [{w[0]:.2e}, {w[1]:.2e}]  eps0 {f.eps0:.10f}  residual {f.residual:.2e}")
