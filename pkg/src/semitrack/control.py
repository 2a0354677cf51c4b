"""Stabilizer synthesis and closed-loop simulation.

State feedback U = U* + F (Xhat(t - delay) - X*) with a Luenberger-style
observer driven by the noisy yaw-rate measurement.  The observer propagates
the quasi-static (reduced) force map and never sees the distributed state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import place_poles

from .errors import ConfigurationError, NumericalError
from .model import ModelForm
from .noise import GaussianNoise
from .pde import Discretization, _check_cfl, _prepare_z0
from .reduced import DIVERGENCE_NORM
from .steady_state import Equilibrium, ForceMapEvaluator

_POLE_TOL = 1e-8


def lyapunov_solve(A: np.ndarray, q: float) -> np.ndarray:
    """Q solving A'Q + QA = -2qI for a 2x2 Hurwitz A (direct 3x3 solve).

    Unknowns are the three entries of the symmetric Q; raises if A is not
    Hurwitz (no symmetric positive-definite solution exists then).
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise ConfigurationError("lyapunov_solve expects a 2x2 matrix")
    if q <= 0.0:
        raise ConfigurationError("q must be > 0")
    if np.max(np.linalg.eigvals(A).real) >= 0.0:
        raise NumericalError(
            "matrix is not Hurwitz; the Lyapunov equation has no positive "
            "definite solution")
    a, b_, c, d = A.ravel()
    # unknowns [q11, q12, q22] from the three independent equations
    sys = np.array([[2.0 * a, 2.0 * c, 0.0],
                    [b_, a + d, c],
                    [0.0, 2.0 * b_, 2.0 * d]])
    rhs = np.array([-2.0 * q, 0.0, -2.0 * q])
    q11, q12, q22 = np.linalg.solve(sys, rhs)
    return np.array([[q11, q12], [q12, q22]])


def _poles_match(A: np.ndarray, poles) -> bool:
    have = np.sort_complex(np.linalg.eigvals(A))
    want = np.sort_complex(np.asarray(poles, dtype=complex))
    return bool(np.allclose(have, want, atol=_POLE_TOL, rtol=0.0))


def design_state_feedback(A1t: np.ndarray, G1t: np.ndarray,
                          poles) -> np.ndarray:
    """Gain F with eig(A1t + G1t F) at the requested poles.

    When the input matrix has a zero column (rear axle not actuated) the
    placement runs on the active column alone and the corresponding row of
    F is zero.  Requesting the open-loop eigenvalues returns F = 0.
    """
    A1t = np.asarray(A1t, dtype=float)
    G1t = np.asarray(G1t, dtype=float)
    poles = np.asarray(poles, dtype=complex)
    if _poles_match(A1t, poles):
        return np.zeros((2, 2))
    col_norms = np.linalg.norm(G1t, axis=0)
    active = np.nonzero(col_norms > 1e-12)[0]
    if active.size == 0:
        raise NumericalError(
            "input matrix is zero; every eigenvalue of the open loop is a "
            "fixed mode")
    B = G1t[:, active]
    ctrb = np.column_stack([B, A1t @ B])
    if np.linalg.matrix_rank(ctrb, tol=1e-10) < 2:
        raise NumericalError(
            f"pair is not controllable; fixed modes at "
            f"{np.linalg.eigvals(A1t)}")
    try:
        res = place_poles(A1t, B, poles)
    except ValueError as exc:
        raise NumericalError(f"pole placement failed: {exc}")
    F = np.zeros((2, 2))
    F[active, :] = -res.gain_matrix
    placed = np.linalg.eigvals(A1t + G1t @ F)
    if not np.allclose(np.sort_complex(placed), np.sort_complex(poles),
                       atol=1e-6, rtol=1e-6):
        raise NumericalError(
            f"pole placement inaccurate: requested {poles}, got {placed}")
    return F


def design_observer(A1t: np.ndarray, C: np.ndarray, poles) -> np.ndarray:
    """Injection gain L with eig(A1t + L C) at the requested poles.

    Solved by duality: place the poles of (A1t', C') and transpose.
    """
    A1t = np.asarray(A1t, dtype=float)
    C = np.asarray(C, dtype=float).reshape(1, 2)
    poles = np.asarray(poles, dtype=complex)
    if _poles_match(A1t, poles):
        return np.zeros((2, 1))
    obsv = np.vstack([C, C @ A1t])
    if np.linalg.matrix_rank(obsv, tol=1e-10) < 2:
        unstable = [lam for lam in np.linalg.eigvals(A1t) if lam.real >= 0]
        if unstable:
            raise NumericalError(
                f"pair is not detectable; unobservable modes include "
                f"{unstable}")
        raise NumericalError(
            "pair is unobservable; pole placement is not possible (the "
            "stable unobservable modes cannot be moved)")
    try:
        res = place_poles(A1t.T, C.T, poles)
    except ValueError as exc:
        raise NumericalError(f"observer pole placement failed: {exc}")
    return -res.gain_matrix.T


def default_poles(A1t: np.ndarray, margin: float = 0.5):
    """Controller/observer pole defaults from the open-loop spectrum.

    Mirrors eigenvalues with nonnegative real part across the imaginary
    axis and pushes everything left by ``margin``; observer poles are the
    controller poles sped up threefold.
    """
    eig = np.linalg.eigvals(np.asarray(A1t, dtype=float))
    ctrl = np.array([complex(-abs(lam.real) - margin, lam.imag)
                     for lam in eig])
    if abs(ctrl[0] - ctrl[1]) < 1e-9 and ctrl[0].imag == 0.0:
        ctrl[1] = ctrl[1] - margin   # place_poles needs distinct real poles
    obs = 3.0 * ctrl
    return ctrl, obs


@dataclass(frozen=True)
class Gains:
    F: np.ndarray            # 2x2 state-feedback gain
    L: np.ndarray            # 2x1 output-injection gain
    alpha_star: np.ndarray   # design-point slip angles


@dataclass(frozen=True)
class ClosedLoopConfig:
    gains: Gains
    target: Equilibrium
    delay: float = 0.0            # input delay [s]
    noise_std: float = 0.0        # yaw-rate noise std [rad/s]
    noise_sample_dt: float = 0.005
    rng_seed: int = 0
    mode: str = "output"          # 'output' (observer) or 'state'

    def __post_init__(self):
        if self.delay < 0.0:
            raise ConfigurationError("delay must be >= 0")
        if self.noise_sample_dt <= 0.0:
            raise ConfigurationError("noise_sample_dt must be > 0")
        if self.mode not in ("output", "state"):
            raise ConfigurationError(
                f"mode must be 'output' or 'state', got {self.mode!r}")


def observer_step(xhat, Y: float, U, form: ModelForm, gains: Gains,
                  dt: float, evaluator: ForceMapEvaluator = None,
                  n_cells: int = 50) -> np.ndarray:
    """One explicit Euler step of the reduced-force observer.

    d/dt xhat = A1 xhat + G1 Phi(alpha(xhat, U)) + b + L (yhat - Y).
    """
    if evaluator is None:
        evaluator = ForceMapEvaluator(form, n_cells)
    xhat = np.asarray(xhat, dtype=float)
    U = np.asarray(U, dtype=float)
    Phi = evaluator.force(form.slip_angles(xhat, U))
    innovation = float(form.C[0] @ xhat) - float(Y)
    L = gains.L.reshape(2)
    dx = form.A1 @ xhat + form.G1 @ Phi + form.b + L * innovation
    return xhat + dt * dx


@dataclass
class ClosedLoopResult:
    t: np.ndarray
    X: np.ndarray
    Xhat: np.ndarray
    U: np.ndarray
    F: np.ndarray
    zeta_norm: np.ndarray
    estimate_error_norm: np.ndarray
    composite_norm: np.ndarray
    diverged: bool = False
    meta: dict = field(default_factory=dict)


def closed_loop_simulate(config: ClosedLoopConfig, X0, z0, xhat0,
                         form: ModelForm, dt: float, T: float,
                         n_cells: int = 50,
                         sample_stride: int = 100) -> ClosedLoopResult:
    """Co-simulation of plant, observer, delay line and measurement noise.

    The plant advances exactly as in the open-loop simulator.  The control
    U = U* + F (xi(t - delay) - X*) uses a ring-buffer delay line where xi
    is the observer state ('output' mode) or the true state ('state' mode);
    the buffer is pre-filled with the initial value.  The yaw-rate
    measurement is zero-order-hold noisy: the Gaussian perturbation is
    redrawn every ``noise_sample_dt`` seconds from the seeded generator.
    """
    _check_cfl(form, n_cells, dt)
    disc = Discretization(form, n_cells)
    evaluator = ForceMapEvaluator(form, n_cells)
    eq = config.target
    X_star, U_star = eq.X_star, eq.U_star
    Fgain = np.asarray(config.gains.F, dtype=float)

    X = np.asarray(X0, dtype=float).copy()
    z = _prepare_z0(z0, n_cells)
    xhat = np.asarray(xhat0, dtype=float).copy()

    n_delay = int(round(config.delay / dt))
    fb0 = xhat if config.mode == "output" else X
    delay_line = [fb0.copy() for _ in range(n_delay + 1)]
    head = 0

    noise = GaussianNoise(config.rng_seed, std=config.noise_std)
    noise_period = max(1, int(round(config.noise_sample_dt / dt)))
    w = 0.0

    inv_eps = 1.0 / form.eps
    A1, G1, b = form.A1, form.G1, form.b
    n_steps = int(round(T / dt))

    ts, Xs, Xhats, Us, Fs = [], [], [], [], []
    zns, errs, comps = [], [], []
    diverged = False

    def control_input():
        fb_delayed = delay_line[head]   # oldest entry = t - delay
        return U_star + Fgain @ (fb_delayed - X_star)

    def record(k, Uv):
        alpha = form.slip_angles(X, Uv)
        zn = disc.zeta_norm(z, alpha)
        err = float(np.linalg.norm(xhat - X))
        ts.append(k * dt)
        Xs.append(X.copy())
        Xhats.append(xhat.copy())
        Us.append(Uv.copy())
        Fs.append(disc.forces(z, alpha))
        zns.append(zn)
        errs.append(err)
        comps.append(float(np.sqrt(
            np.sum((X - X_star) ** 2) + zn ** 2 + err ** 2)))

    record(0, control_input())
    for k in range(n_steps):
        if config.noise_std > 0.0 and k % noise_period == 0:
            w = noise.draw()
        Uv = control_input()
        Y = float(form.C[0] @ X) + w

        alpha = form.slip_angles(X, Uv)
        Fv = disc.forces(z, alpha)
        X_new = X + dt * (A1 @ X + G1 @ Fv + b)
        z = z + (dt * inv_eps) * disc.pde_rhs(z, alpha)
        z[:, 0] = 0.0
        xhat = observer_step(xhat, Y, Uv, form, config.gains, dt,
                             evaluator=evaluator)
        X = X_new

        fb = xhat if config.mode == "output" else X
        delay_line[head] = fb.copy()
        head = (head + 1) % len(delay_line)

        if not np.isfinite(X).all() or np.linalg.norm(X) > DIVERGENCE_NORM:
            diverged = True
            record(k + 1, Uv)
            break
        if (k + 1) % sample_stride == 0 or k == n_steps - 1:
            record(k + 1, control_input())

    return ClosedLoopResult(
        t=np.array(ts), X=np.array(Xs), Xhat=np.array(Xhats),
        U=np.array(Us), F=np.array(Fs), zeta_norm=np.array(zns),
        estimate_error_norm=np.array(errs),
        composite_norm=np.array(comps), diverged=diverged,
        meta={"n_cells": n_cells, "dt": dt, "mode": config.mode,
              "delay": config.delay, "noise_std": config.noise_std,
              "noise_sample_dt": config.noise_sample_dt,
              "seed": config.rng_seed, "carcass": form.carcass,
              "Lbar_rule": form.params.Lbar_rule, "eps": form.eps})


@dataclass(frozen=True)
class NormFit:
    t: np.ndarray
    norm: np.ndarray
    beta_hat: float    # fitted envelope amplitude
    sigma_hat: float   # fitted envelope decay rate


def norm_trajectory(result: ClosedLoopResult) -> NormFit:
    """Composite norm series with a fitted bounding exponential.

    Fits log(norm) ~ log(beta) - sigma t by least squares over the samples
    above the terminal floor, then lifts beta so the envelope dominates
    every sample.
    """
    t = result.t
    norm = result.composite_norm
    floor = max(np.min(norm), 1e-300)
    mask = norm > 2.0 * floor
    if np.count_nonzero(mask) < 2:
        return NormFit(t=t, norm=norm, beta_hat=float(np.max(norm)),
                       sigma_hat=0.0)
    slope, intercept = np.polyfit(t[mask], np.log(norm[mask]), 1)
    sigma_hat = -slope
    # raise the amplitude until beta e^{-sigma t} >= norm everywhere
    shift = np.max(np.log(norm) - (intercept + slope * t))
    return NormFit(t=t, norm=norm,
                   beta_hat=float(np.exp(intercept + max(shift, 0.0))),
                   sigma_hat=float(sigma_hat))
