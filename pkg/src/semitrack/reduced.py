"""The quasi-static-tire (eps = 0) reduced ODE subsystem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelForm
from .steady_state import force_map

DIVERGENCE_NORM = 1e6


@dataclass(frozen=True)
class ReducedTrajectory:
    t: np.ndarray       # uniform sample times [s]
    X: np.ndarray       # (n, 2) lumped states
    U: np.ndarray       # (n, 2) steering inputs
    F: np.ndarray       # (n, 2) quasi-static tire forces
    diverged: bool = False


@dataclass(frozen=True)
class StabilityVerdict:
    eigenvalues: np.ndarray
    hurwitz: bool
    understeer_index: float   # C1 l1 / (C2 l2); nan when degenerate
    degenerate: bool


def _const_input(U):
    U = np.zeros(2) if U is None else np.asarray(U, dtype=float)
    return lambda t: U


def as_input_fn(u):
    """Normalize an input spec (None, constant vector, or callable)."""
    return u if callable(u) else _const_input(u)


def simulate_reduced(X0, u, b, form: ModelForm, dt: float, T: float,
                     n_cells: int = 50,
                     sample_stride: int = 1) -> ReducedTrajectory:
    """Integrate the reduced ODE with the classic 4th-order one-step scheme.

    Forces are evaluated through the steady force map at every stage.
    Terminates early (flagged ``diverged``) once ||X|| exceeds 1e6.
    """
    if dt <= 0.0 or T < dt:
        raise ValueError("need dt > 0 and T >= dt")
    u = as_input_fn(u)
    b = np.asarray(b, dtype=float)

    def rhs(t, X):
        alpha = form.slip_angles(X, u(t))
        return form.A1 @ X + form.G1 @ force_map(alpha, form, n_cells) + b

    n_steps = int(round(T / dt))
    X = np.asarray(X0, dtype=float).copy()
    ts, Xs, Us, Fs = [], [], [], []
    diverged = False

    def record(t, X):
        ts.append(t)
        Xs.append(X.copy())
        Uv = u(t)
        Us.append(np.asarray(Uv, dtype=float).copy())
        Fs.append(force_map(form.slip_angles(X, Uv), form, n_cells))

    record(0.0, X)
    for k in range(n_steps):
        t = k * dt
        k1 = rhs(t, X)
        k2 = rhs(t + 0.5 * dt, X + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, X + 0.5 * dt * k2)
        k4 = rhs(t + dt, X + dt * k3)
        X = X + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.linalg.norm(X) > DIVERGENCE_NORM:
            diverged = True
            record((k + 1) * dt, X)
            break
        if (k + 1) % sample_stride == 0 or k == n_steps - 1:
            record((k + 1) * dt, X)

    return ReducedTrajectory(t=np.array(ts), X=np.array(Xs),
                             U=np.array(Us), F=np.array(Fs),
                             diverged=diverged)


def reduced_stability(alpha_star, form: ModelForm,
                      n_cells: int = 50) -> StabilityVerdict:
    """Local stability verdict of the reduced model at the given slip angles."""
    from .steady_state import cornering_stiffness
    Ct = cornering_stiffness(np.asarray(alpha_star, dtype=float),
                             form, n_cells)
    return stability_from_stiffness(Ct, form)


def stability_from_stiffness(Ctilde: np.ndarray,
                             form: ModelForm) -> StabilityVerdict:
    """Verdict from an explicit diagonal cornering-stiffness matrix.

    Reports the eigenvalues of A1 + G1 C A2, the Hurwitz flag, and the
    understeer index C1 l1 / (C2 l2) (degenerate when C2 l2 = 0).
    """
    p = form.params
    A1t = form.A1 + form.G1 @ Ctilde @ form.A2
    eig = np.linalg.eigvals(A1t)
    c1, c2 = Ctilde[0, 0], Ctilde[1, 1]
    denom = c2 * p.l2
    degenerate = denom == 0.0
    index = np.nan if degenerate else c1 * p.l1 / denom
    return StabilityVerdict(eigenvalues=eig,
                            hurwitz=bool(np.max(eig.real) < 0.0),
                            understeer_index=index,
                            degenerate=degenerate)


def critical_speed(c1: float, c2: float, params) -> float:
    """Speed at which an oversteer reduced model loses stability.

    Returns inf for understeer or neutral configurations (l1 c1 <= l2 c2).
    """
    excess = params.l1 * c1 - params.l2 * c2
    if excess <= 0.0:
        return np.inf
    return np.sqrt(c1 * c2 * (params.l1 + params.l2) ** 2
                   / (params.m * excess))
