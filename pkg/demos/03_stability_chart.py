"""Stability chart of the linearized full interconnection.

Sweeps the zero-equilibrium generator spectrum over the understeer index
and the longitudinal speed, and overlays the reduced-model critical-speed
curve: above the curve an oversteer vehicle is unstable already in the
two-state approximation.
"""

import os
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from semitrack import VehicleParams, critical_speed, sweep_chart

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

params = VehicleParams()
index_values = np.linspace(0.5, 1.5, 15)
vx_values = np.linspace(2.0, 60.0, 15)

start = time.perf_counter()
cells = sweep_chart(index_values, vx_values, params, carcass="flexible",
                    n_cells=50, jobs=4)
print(f"evaluated {len(cells)} cells in {time.perf_counter() - start:.1f} s")

grid = np.array([c.max_real_part for c in cells]).reshape(
    len(index_values), len(vx_values))
stable = np.array([c.stable for c in cells]).reshape(grid.shape)
print(f"stable cells: {int(stable.sum())}/{stable.size}")

fig, ax = plt.subplots(figsize=(7, 5))
pc = ax.pcolormesh(vx_values, index_values, grid, cmap="RdBu_r",
                   vmin=-np.nanmax(np.abs(grid)),
                   vmax=np.nanmax(np.abs(grid)), shading="nearest")
fig.colorbar(pc, ax=ax, label="rightmost eigenvalue real part [1/s]")

# reduced-model critical speed for oversteer indices
c2 = params.F_z2 * params.sigma0_2 * params.L2
over = index_values[index_values > 1.0]
vcrit = [critical_speed(i * c2 * params.l2 / params.l1, c2, params)
         for i in over]
ax.plot(vcrit, over, "k--", lw=2, label="reduced-model critical speed")
ax.set_xlim(vx_values[0], vx_values[-1])
ax.set_xlabel("longitudinal speed v_x [m/s]")
ax.set_ylabel("understeer index C1 l1 / (C2 l2)")
ax.legend(loc="upper left")
ax.set_title("stability chart (flexible carcass, zero equilibrium)")
fig.tight_layout()
path = os.path.join(OUT, "stability_chart.png")
fig.savefig(path, dpi=130)
print("wrote", path)
