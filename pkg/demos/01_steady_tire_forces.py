"""Steady tire forces and bristle profiles.

Sweeps the slip angle through the force map for both carcass
parametrizations, compares the rigid case against its closed form, and
plots a few steady bristle deflection profiles.  Outputs land in
demos/output/.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from semitrack import (VehicleParams, assemble_flexible, assemble_rigid,
                       cornering_stiffness, force_map, solve_phi)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

params = VehicleParams()
rigid = assemble_rigid(params)
flexible = assemble_flexible(params)

# --- force vs slip -------------------------------------------------------
alphas = np.linspace(-0.3, 0.3, 121)
F_rigid = np.array([force_map(np.array([a, a]), rigid, 100)
                    for a in alphas])
F_flex = np.array([force_map(np.array([a, a]), flexible, 100)
                   for a in alphas])

# rigid closed form for the front axle
s0 = params.sigma0_1 * params.L1
with np.errstate(divide="ignore", invalid="ignore"):
    arg = s0 * np.abs(alphas)
    exact = 2 * params.F_z1 * np.sign(alphas) * (1 - (1 - np.exp(-arg)) / arg)
exact[alphas == 0.0] = 0.0

print("max |numeric - closed form| on the front axle:",
      float(np.max(np.abs(F_rigid[:, 0] - exact))), "N")

C = cornering_stiffness(np.zeros(2), flexible, 200)
print(f"zero-slip cornering stiffnesses: C1 = {C[0, 0]:.0f} N/rad, "
      f"C2 = {C[1, 1]:.0f} N/rad")
index = C[0, 0] * params.l1 / (C[1, 1] * params.l2)
print(f"understeer index C1 l1 / (C2 l2) = {index:.4f} "
      f"({'oversteer' if index > 1 else 'understeer'})")

fig, ax = plt.subplots(1, 2, figsize=(11, 4))
ax[0].plot(np.degrees(alphas), F_rigid[:, 0], label="front, rigid")
ax[0].plot(np.degrees(alphas), F_flex[:, 0], "--", label="front, flexible")
ax[0].plot(np.degrees(alphas), F_rigid[:, 1], label="rear, rigid")
ax[0].set_xlabel("slip angle [deg]")
ax[0].set_ylabel("lateral force [N]")
ax[0].legend()
ax[0].set_title("steady force map")

# --- bristle profiles ----------------------------------------------------
for a in (0.02, 0.05, 0.15):
    prof = solve_phi(np.array([a, a]), flexible, 200)
    ax[1].plot(prof.xi, prof.values[0], label=f"alpha = {a:g} rad")
ax[1].set_xlabel("normalized patch coordinate xi")
ax[1].set_ylabel("front bristle deflection")
ax[1].legend()
ax[1].set_title("steady profiles (flexible carcass)")

fig.tight_layout()
path = os.path.join(OUT, "steady_forces.png")
fig.savefig(path, dpi=130)
print("wrote", path)
