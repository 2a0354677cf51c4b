"""Scripted numerical experiments built from the simulators.

These are the reproducible studies the package ships: the time-scale
separation sweep (full vs. reduced trajectories as the fast parameter
shrinks), initial-condition and speed sweeps of the closed loop, and the
noise-floor measurement used to interpret closed-loop convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import (ClosedLoopConfig, ClosedLoopResult, Gains,
                      closed_loop_simulate)
from .model import assemble
from .params import VehicleParams
from .pde import max_stable_dt, simulate_full
from .reduced import simulate_reduced
from .steady_state import find_equilibrium


@dataclass(frozen=True)
class EpsilonSweepResult:
    eps_values: np.ndarray     # fast parameters, decreasing
    gaps: np.ndarray           # sup-norm trajectory gaps vs. the reduced run
    ratios: np.ndarray         # successive gap ratios gaps[k] / gaps[k+1]
    meta: dict = field(default_factory=dict)


def _interp_rows(t_src, X_src, t_dst):
    out = np.empty((len(t_dst), X_src.shape[1]))
    for j in range(X_src.shape[1]):
        out[:, j] = np.interp(t_dst, t_src, X_src[:, j])
    return out


def epsilon_sweep(base_params: VehicleParams, carcass: str = "rigid",
                  X0=(0.01, -0.05), u=None, T: float = 1.0,
                  n_cells: int = 50, halvings: int = 2,
                  cfl_fraction: float = 0.5,
                  reduced_dt: float = 1e-4) -> EpsilonSweepResult:
    """Full-vs-reduced trajectory gap as the fast parameter halves.

    The fast parameter is scaled through the characteristic contact length:
    both patch lengths shrink together while the micro-stiffnesses scale
    inversely, which keeps the products sigma0_i L_i -- and with them the
    steady force map and the reduced dynamics -- fixed.  A single reduced
    reference therefore serves every full run.
    """
    X0 = np.asarray(X0, dtype=float)
    base_form = assemble(base_params, carcass=carcass)
    b = base_form.b
    ref = simulate_reduced(X0, u, b, base_form, dt=reduced_dt, T=T,
                           n_cells=n_cells)

    eps_list, gaps = [], []
    scale = 1.0
    for _ in range(halvings + 1):
        p = base_params.replace(L1=base_params.L1 * scale,
                                L2=base_params.L2 * scale,
                                sigma0_1=base_params.sigma0_1 / scale,
                                sigma0_2=base_params.sigma0_2 / scale)
        form = assemble(p, carcass=carcass)
        dt = cfl_fraction * max_stable_dt(form, n_cells)
        stride = max(1, int(round(1e-3 / dt)))
        traj = simulate_full(X0, None, u, form, dt=dt, T=T,
                             n_cells=n_cells, sample_stride=stride)
        ref_on = _interp_rows(ref.t, ref.X, traj.t)
        gaps.append(float(np.max(np.linalg.norm(traj.X - ref_on, axis=1))))
        eps_list.append(form.eps)
        scale *= 0.5

    gaps = np.array(gaps)
    return EpsilonSweepResult(
        eps_values=np.array(eps_list), gaps=gaps,
        ratios=gaps[:-1] / gaps[1:],
        meta={"carcass": carcass, "T": T, "n_cells": n_cells,
              "cfl_fraction": cfl_fraction, "X0": X0.tolist()})


def benchmark_gains() -> Gains:
    """The benchmark feedback/injection gains used by the shipped scenario."""
    return Gains(F=np.array([[2.034, -0.0458], [0.0, 0.0]]),
                 L=np.array([[-16.02], [-147.267]]),
                 alpha_star=np.zeros(2))


def benchmark_closed_loop(params: VehicleParams = None,
                          carcass: str = "flexible",
                          X0=(0.03, -0.25), z0=(0.027, 0.033),
                          xhat0=(0.0, 0.0), gains: Gains = None,
                          delay: float = 0.02, noise_std: float = 0.1,
                          noise_sample_dt: float = 0.005, seed: int = 7,
                          dt: float = 1e-5, T: float = 5.0,
                          n_cells: int = 50, mode: str = "output",
                          sample_stride: int = 1000) -> ClosedLoopResult:
    """The reference output-feedback stabilization run (zero equilibrium)."""
    params = VehicleParams() if params is None else params
    form = assemble(params, carcass=carcass)
    eq = find_equilibrium(np.zeros(2), form.b, form, n_cells)
    cfg = ClosedLoopConfig(gains=gains or benchmark_gains(), target=eq,
                           delay=delay, noise_std=noise_std,
                           noise_sample_dt=noise_sample_dt, rng_seed=seed,
                           mode=mode)
    return closed_loop_simulate(cfg, np.asarray(X0, float),
                                np.asarray(z0, float),
                                np.asarray(xhat0, float),
                                form, dt=dt, T=T, n_cells=n_cells,
                                sample_stride=sample_stride)


def noise_floor(params: VehicleParams = None, carcass: str = "flexible",
                seed: int = 7, dt: float = 1e-5, T: float = 2.0,
                n_cells: int = 50, noise_std: float = 0.1,
                noise_sample_dt: float = 0.005, delay: float = 0.02,
                gains: Gains = None) -> float:
    """Steady composite-norm level sustained by measurement noise alone.

    Runs the closed loop from the equilibrium itself and reports the RMS
    composite norm over the second half of the run.
    """
    res = benchmark_closed_loop(
        params=params, carcass=carcass, X0=(0.0, 0.0), z0=(0.0, 0.0),
        xhat0=(0.0, 0.0), gains=gains, delay=delay, noise_std=noise_std,
        noise_sample_dt=noise_sample_dt, seed=seed, dt=dt, T=T,
        n_cells=n_cells)
    tail = res.composite_norm[len(res.composite_norm) // 2:]
    return float(np.sqrt(np.mean(tail ** 2)))


def k_sweep(k_values=(1, 3, 6), threshold: float = 0.1,
            **kwargs) -> dict:
    """Closed-loop runs from scaled initial conditions X0 = -k [0.03, -0.05].

    Returns per-k results and the time each composite norm first drops
    below ``threshold`` times its initial value (inf if never).
    """
    runs, times = {}, {}
    for k in k_values:
        X0 = -float(k) * np.array([0.03, -0.05])
        res = benchmark_closed_loop(X0=X0, **kwargs)
        runs[k] = res
        below = np.nonzero(
            res.composite_norm < threshold * res.composite_norm[0])[0]
        times[k] = float(res.t[below[0]]) if below.size else np.inf
    return {"runs": runs, "settle_times": times}


def vx_sweep(vx_values=(10.0, 20.0, 50.0), params: VehicleParams = None,
             **kwargs) -> dict:
    """Closed-loop runs across longitudinal speeds.

    The same shipped gains are applied at every speed; no per-speed
    redesign happens.
    """
    params = VehicleParams() if params is None else params
    runs = {}
    for vx in vx_values:
        runs[vx] = benchmark_closed_loop(params=params.replace(v_x=vx),
                                         **kwargs)
    return runs
