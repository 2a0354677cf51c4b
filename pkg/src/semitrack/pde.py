"""Time-domain simulation of the full ODE-PDE interconnection.

Spatial scheme: first-order upwind (backward difference; the transport
speed Lambda/eps is positive and the boundary condition sits at xi = 0).
Time scheme: explicit Euler with a CFL guard (Lambda_ii/eps) dt/dxi <= 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalError
from .grid import grid_l2_norm, quad_weights, uniform_grid
from .model import ModelForm
from .reduced import DIVERGENCE_NORM, as_input_fn
from .steady_state import solve_phi


@dataclass(frozen=True)
class FullState:
    X: np.ndarray            # lumped states [beta, r]
    z: np.ndarray            # (2, N+1) bristle grid, z[:, 0] == 0
    t: float = 0.0


@dataclass
class FullTrajectory:
    t: np.ndarray
    X: np.ndarray            # (n, 2)
    U: np.ndarray            # (n, 2)
    F: np.ndarray            # (n, 2) tire forces
    zeta_norm: np.ndarray    # (n,) L2 norm of z - phi(., alpha)
    snapshots: dict = field(default_factory=dict)   # time -> (2, N+1)
    diverged: bool = False
    meta: dict = field(default_factory=dict)


class Discretization:
    """Precomputed grid arrays for one (form, N) pair."""

    def __init__(self, form: ModelForm, n_cells: int):
        self.form = form
        self.n = n_cells
        self.xi = uniform_grid(n_cells)
        self.dxi = 1.0 / n_cells
        self.w = quad_weights(n_cells)
        self.k1 = form.k1(self.xi)                     # (2, N+1)
        self.k2 = form.k2(self.xi)
        self.k3 = form.k3(self.xi)
        self.k4 = form.k4(self.xi)
        self.k5 = form.k5
        self.lam = form.lam
        self.k1w = self.k1 * self.w                    # quadrature rows
        self.k2w = self.k2 * self.w
        self.k3w = self.k3 * self.w
        self.k4w = self.k4 * self.w
        self.has_k2 = bool(np.any(self.k2))
        self.has_nonlocal = bool(np.any(self.k3w) or np.any(self.k4w)
                                 or np.any(self.k5))

    def forces(self, z: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """Tire forces K1 z + Sigma(alpha) K2 z + h1(alpha)."""
        out = np.einsum("ij,ij->i", self.k1w, z)
        if self.has_k2:
            out = out + self.form.sigma(alpha) * np.einsum(
                "ij,ij->i", self.k2w, z)
        return out + self.form.h1(alpha)

    def pde_rhs(self, z: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """Source + transport right side of eps dz/dt (shape (2, N+1))."""
        sig = self.form.sigma(alpha)
        src = sig[:, None] * z + self.form.h2(alpha)[:, None]
        if self.has_nonlocal:
            k3z = np.einsum("ij,ij->i", self.k3w, z)
            k4z = np.einsum("ij,ij->i", self.k4w, z) + self.k5 * z[:, -1]
            src = src + (sig * k3z + k4z)[:, None]
        rhs = src
        rhs[:, 1:] -= self.lam[:, None] * (z[:, 1:] - z[:, :-1]) / self.dxi
        rhs[:, 0] = 0.0
        return rhs

    def zeta_norm(self, z: np.ndarray, alpha: np.ndarray) -> float:
        phi = solve_phi(alpha, self.form, self.n).values
        return grid_l2_norm(z - phi, self.w)


def tire_forces(state: FullState, alpha, form: ModelForm) -> np.ndarray:
    """Tire forces for a grid state at the given slip angles."""
    n_cells = state.z.shape[1] - 1
    disc = Discretization(form, n_cells)
    return disc.forces(state.z, np.asarray(alpha, dtype=float))


def max_stable_dt(form: ModelForm, n_cells: int,
                  stretched: bool = False) -> float:
    """Largest explicit-Euler step satisfying the upwind CFL condition.

    In stretched (boundary-layer) time the transport speed is Lambda
    itself, otherwise Lambda/eps.
    """
    dxi = 1.0 / n_cells
    speed = np.max(form.lam) / (1.0 if stretched else form.eps)
    return dxi / speed


def _check_cfl(form: ModelForm, n_cells: int, dt: float,
               stretched: bool = False):
    dt_max = max_stable_dt(form, n_cells, stretched)
    if dt > dt_max * (1.0 + 1e-12):
        raise ConfigurationError(
            f"CFL violated: dt = {dt:.3e} exceeds the maximal admissible "
            f"step {dt_max:.3e} for N = {n_cells}")


def step_full(state: FullState, U, form: ModelForm, dt: float) -> FullState:
    """One explicit Euler step of the full interconnection.

    The bristle grid advances by upwind transport plus source terms scaled
    by 1/eps; node 0 is re-pinned to the boundary condition.
    """
    n_cells = state.z.shape[1] - 1
    _check_cfl(form, n_cells, dt)
    disc = Discretization(form, n_cells)
    U = np.asarray(U, dtype=float)
    alpha = form.slip_angles(state.X, U)
    F = disc.forces(state.z, alpha)
    X_new = state.X + dt * (form.A1 @ state.X + form.G1 @ F + form.b)
    z_new = state.z + (dt / form.eps) * disc.pde_rhs(state.z, alpha)
    z_new[:, 0] = 0.0
    return FullState(X=X_new, z=z_new, t=state.t + dt)


def _prepare_z0(z0, n_cells: int) -> np.ndarray:
    z = np.zeros((2, n_cells + 1))
    if z0 is not None:
        z0 = np.asarray(z0, dtype=float)
        if z0.ndim == 1:          # constant-in-xi initial profile
            z[:] = z0[:, None]
        else:
            z[:] = z0
    z[:, 0] = 0.0
    return z


def simulate_full(X0, z0, u, form: ModelForm, dt: float, T: float,
                  n_cells: int = 50, sample_stride: int = 100,
                  snapshot_times=None) -> FullTrajectory:
    """Repeated explicit stepping of the full ODE-PDE system.

    ``u`` may be None, a constant input vector, or a callable of time.
    Records X, forces and ||zeta||_{L2} (zeta = z - phi(., alpha)
    recomputed at sample instants); optional z snapshots at requested times.
    """
    _check_cfl(form, n_cells, dt)
    u = as_input_fn(u)
    disc = Discretization(form, n_cells)
    X = np.asarray(X0, dtype=float).copy()
    z = _prepare_z0(z0, n_cells)
    inv_eps = 1.0 / form.eps
    A1, G1, b = form.A1, form.G1, form.b

    snapshot_times = sorted(snapshot_times or [])
    snap_steps = {int(round(ts / dt)): ts for ts in snapshot_times}

    n_steps = int(round(T / dt))
    ts, Xs, Us, Fs, zns = [], [], [], [], []
    snapshots = {}
    diverged = False

    def record(k):
        t = k * dt
        Uv = np.asarray(u(t), dtype=float)
        alpha = form.slip_angles(X, Uv)
        ts.append(t)
        Xs.append(X.copy())
        Us.append(Uv.copy())
        Fs.append(disc.forces(z, alpha))
        zns.append(disc.zeta_norm(z, alpha))

    record(0)
    if 0 in snap_steps:
        snapshots[snap_steps[0]] = z.copy()
    for k in range(n_steps):
        Uv = np.asarray(u(k * dt), dtype=float)
        alpha = form.slip_angles(X, Uv)
        F = disc.forces(z, alpha)
        X = X + dt * (A1 @ X + G1 @ F + b)
        z = z + (dt * inv_eps) * disc.pde_rhs(z, alpha)
        z[:, 0] = 0.0
        if not np.isfinite(X).all() or np.linalg.norm(X) > DIVERGENCE_NORM:
            diverged = True
            record(k + 1)
            break
        if (k + 1) in snap_steps:
            snapshots[snap_steps[k + 1]] = z.copy()
        if (k + 1) % sample_stride == 0 or k == n_steps - 1:
            record(k + 1)

    return FullTrajectory(
        t=np.array(ts), X=np.array(Xs), U=np.array(Us), F=np.array(Fs),
        zeta_norm=np.array(zns), snapshots=snapshots, diverged=diverged,
        meta={"n_cells": n_cells, "dt": dt, "carcass": form.carcass,
              "Lbar": form.Lbar, "Lbar_rule": form.params.Lbar_rule,
              "eps": form.eps})


@dataclass(frozen=True)
class DecayRecord:
    s: np.ndarray            # stretched-time samples
    norm: np.ndarray         # L2 norms of the layer state
    rate: float              # fitted exponential decay rate (omega-hat)


def fit_decay_rate(s: np.ndarray, norms: np.ndarray,
                   upper: float = 1e-2, lower: float = 1e-9) -> float:
    """Least-squares exponential rate from the decaying tail of a norm record.

    Fits log(norm) over samples between ``upper`` and ``lower`` times the
    initial norm, skipping the initial transport transit.
    """
    n0 = norms[0]
    if n0 == 0.0:
        return 0.0
    mask = (norms > lower * n0) & (norms < upper * n0) & (norms > 0.0)
    if np.count_nonzero(mask) < 3:
        mask = norms > max(lower * n0, 0.0)
        mask[: len(mask) // 2] = False
    if np.count_nonzero(mask) < 2:
        raise NumericalError("not enough decaying samples to fit a rate")
    coef = np.polyfit(s[mask], np.log(norms[mask]), 1)
    return float(-coef[0])


def simulate_boundary_layer(zeta0, X, U, form: ModelForm, ds: float,
                            S: float, n_cells: int = 50,
                            sample_stride: int = 10) -> DecayRecord:
    """Integrate the eps-free boundary-layer PDE at frozen (X, U).

    Returns the L2 norm samples in stretched time together with a fitted
    exponential decay rate.
    """
    _check_cfl(form, n_cells, ds, stretched=True)
    disc = Discretization(form, n_cells)
    alpha = form.slip_angles(np.asarray(X, dtype=float),
                             np.asarray(U, dtype=float))
    zeta = _prepare_z0(zeta0, n_cells)
    # The layer dynamics are the PDE right side minus the constant forcing,
    # i.e. the homogeneous part; subtracting the rhs at zero removes h2.
    rhs0 = disc.pde_rhs(np.zeros_like(zeta), alpha)

    n_steps = int(round(S / ds))
    ss, norms = [0.0], [grid_l2_norm(zeta, disc.w)]
    for k in range(n_steps):
        zeta = zeta + ds * (disc.pde_rhs(zeta, alpha) - rhs0)
        zeta[:, 0] = 0.0
        if (k + 1) % sample_stride == 0 or k == n_steps - 1:
            ss.append((k + 1) * ds)
            norms.append(grid_l2_norm(zeta, disc.w))
    ss = np.array(ss)
    norms = np.array(norms)
    rate = 0.0 if norms[0] == 0.0 else fit_decay_rate(ss, norms)
    return DecayRecord(s=ss, norm=norms, rate=rate)


def discrete_steady_profile(y, form: ModelForm, n_cells: int) -> np.ndarray:
    """Stationary bristle grid of the upwind discretization at frozen slip.

    Counterpart of the continuum steady profile, but consistent with the
    simulator's finite differences: simulating from it holds the state to
    rounding accuracy.
    """
    y = np.asarray(y, dtype=float)
    disc = Discretization(form, n_cells)
    sig = form.sigma(y)
    h2 = form.h2(y)
    z = np.zeros((2, n_cells + 1))
    for i in range(2):
        step = disc.dxi / disc.lam[i]
        denom = 1.0 - step * sig[i]
        # The steady grid is linear in the constant source: z_i = c * u with
        # u the sweep of the upwind recursion driven by a unit constant.
        u = np.zeros(n_cells + 1)
        for j in range(1, n_cells + 1):
            u[j] = (u[j - 1] + step) / denom
        c = h2[i]
        if disc.has_nonlocal:
            # Nonlocal functionals of z = c*u feed back linearly into c:
            # c = h2 + (sig*K3[u] + K4[u]) * c.
            rho = (sig[i] * (disc.k3w[i] @ u)
                   + disc.k4w[i] @ u + disc.k5[i] * u[-1])
            if abs(1.0 - rho) < 1e-14:
                raise NumericalError(
                    f"discrete steady profile is singular for component "
                    f"{i + 1}")
            c = h2[i] / (1.0 - rho)
        z[i] = c * u
    return z


def discrete_equilibrium(U_star, b, form: ModelForm, n_cells: int,
                         X0=None, tol: float = 1e-12,
                         max_iter: int = 60):
    """(X, z) fixed point of the fully discretized dynamics.

    Newton on X with the discrete steady bristle profile and the shared
    quadrature forces; used to validate quadrature/transport compatibility.
    """
    U_star = np.asarray(U_star, dtype=float)
    b = np.asarray(b, dtype=float)
    disc = Discretization(form, n_cells)

    def residual(X):
        alpha = form.slip_angles(X, U_star)
        z = discrete_steady_profile(alpha, form, n_cells)
        return form.A1 @ X + form.G1 @ disc.forces(z, alpha) + b

    X = np.zeros(2) if X0 is None else np.asarray(X0, dtype=float).copy()
    res = residual(X)
    for _ in range(max_iter):
        nrm = np.max(np.abs(res))
        if nrm < tol:
            break
        h = 1e-7
        jac = np.column_stack([
            (residual(X + h * e) - res) / h for e in np.eye(2)])
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"singular Jacobian in the discrete equilibrium solve "
                f"({exc}); no admissible equilibrium for this input")
        lam = 1.0
        for _ in range(30):
            X_new = X + lam * step
            res_new = residual(X_new)
            if np.max(np.abs(res_new)) < nrm:
                break
            lam *= 0.5
        else:
            raise NumericalError(
                f"discrete equilibrium Newton stagnated; residual inf-norm "
                f"{nrm:.3e} (the requested input may admit no equilibrium)")
        X, res = X_new, res_new
    else:
        raise NumericalError("discrete equilibrium Newton did not converge")
    z = discrete_steady_profile(form.slip_angles(X, U_star), form, n_cells)
    return X, z
