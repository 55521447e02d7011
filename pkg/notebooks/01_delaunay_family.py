"""
The Delaunay family in dimension seven
======================================

Shoot the periodic solutions of the cylinder ODE for necksizes between
the cylinder and half its value, then look at how period, energy and
the Pohozaev invariant move along the family.

Run with ``python3 notebooks/01_delaunay_family.py``; figures go to
``$QSIX_OUTPUT_DIR`` (default ``./qsix-output``).
"""

# %%
import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qsix import continuation_sweep, make_params
from qsix.shooting import linearized_period
from qsix.invariants import pohozaev_cyl

out = Path(os.environ.get("QSIX_OUTPUT_DIR", "qsix-output"))
out.mkdir(parents=True, exist_ok=True)

p = make_params(7)
print(f"eps_star = {p.eps_star:.16f}, linear period = {linearized_period(p):.6f}")

# %%
# Each orbit warm-starts the next one.
rels = np.linspace(0.95, 0.5, 10)
sweep = continuation_sweep(p, rels * p.eps_star)
for o in sweep.orbits:
    print(f"eps0/eps* = {o.eps0 / p.eps_star:.2f}  period = {o.period:.6f}  "
          f"H = {o.energy:+.6f}  residual = {o.residual:.1e}")

# %%
# One period of each orbit in cylinder time.
fig, ax = plt.subplots(figsize=(6, 4))
for o in sweep.orbits[::3]:
    t, y = o.sample(400)
    ax.plot(t, y[:, 0], label=f"{o.eps0 / p.eps_star:.2f} eps*")
ax.axhline(p.eps_star, color="k", lw=0.5)
ax.set_xlabel("t")
ax.set_ylabel("v")
ax.legend()
fig.savefig(out / "delaunay_orbits.png", dpi=120)

# %%
# The invariant rises toward zero as the neck pinches.
pc = [pohozaev_cyl(p, o).p_cyl for o in sweep.orbits]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(rels, pc, "o-")
ax.set_xlabel("eps0 / eps*")
ax.set_ylabel("P_cyl")
fig.savefig(out / "pohozaev_curve.png", dpi=120)
print("figures in", out)
