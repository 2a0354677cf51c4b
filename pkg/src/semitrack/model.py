"""State-space assembly for the single-track ODE-PDE interconnection.

The lumped states are X = [beta, r] (sideslip angle, yaw rate); the
distributed state z(xi, t) in R^2 carries the nondimensional bristle
deflection of the front/rear contact patches on xi in [0, 1].  Both carcass
parametrizations (rigid and flexible) share

    dX/dt       = A1 X + G1 [K1 z + Sigma(alpha) K2 z + h1(alpha)] + b
    eps dz/dt   = -Lambda dz/dxi + Sigma(alpha)[z + K3 z] + K4 z + h2(alpha)
    z(0, t)     = 0
    alpha(X, U) = A2 X + G2 U

with every kernel diagonal, so they are stored as length-2 diagonal
functions of xi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .params import PressureProfile, VehicleParams

FrictionFn = Callable[[np.ndarray], np.ndarray]


def _ones(_alpha):
    return 1.0


def reg_abs(v, eps_reg: float):
    """Regularized absolute value sqrt(v^2 + eps_reg).

    Exact |v| for eps_reg = 0, converges uniformly to |v| as eps_reg -> 0.
    """
    if eps_reg < 0.0:
        raise ConfigurationError("eps_reg must be >= 0")
    if eps_reg == 0.0:
        return np.abs(v)
    return np.sqrt(np.asarray(v, dtype=float) ** 2 + eps_reg)


@dataclass(frozen=True)
class ModelForm:
    """Assembled state-space objects; immutable and shareable.

    Diagonal 2x2 matrix kernels are represented by their diagonals:
    ``k1(xi)``, ``k2(xi)``, ``k3(xi)``, ``k4(xi)`` return arrays of shape
    (2,) + xi.shape, ``k5`` is the length-2 diagonal of the boundary term,
    ``sigma(alpha)`` the (nonpositive) diagonal of the source matrix.
    """

    carcass: str
    params: VehicleParams
    pressures: tuple[PressureProfile, PressureProfile]
    A1: np.ndarray
    A2: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    lam: np.ndarray                 # diagonal of Lambda, = 1 / Lbar_i
    Lbar: float
    Lbar_i: np.ndarray              # L_i / Lbar
    eps: float                      # time-scale parameter Lbar / v_x
    k1: Callable
    k2: Callable
    k3: Callable
    k4: Callable
    k5: np.ndarray
    sigma: Callable
    h1: Callable
    h2: Callable
    b: np.ndarray
    C: np.ndarray = field(default_factory=lambda: np.array([[0.0, 1.0]]))
    mu: tuple[FrictionFn, FrictionFn] = (_ones, _ones)
    g: tuple[FrictionFn, FrictionFn] = (_ones, _ones)

    def slip_angles(self, X, U) -> np.ndarray:
        return self.A2 @ np.asarray(X, dtype=float) + \
            self.G2 @ np.asarray(U, dtype=float)


def slip_angles(X, U, form: ModelForm) -> np.ndarray:
    """Apparent slip angle vector alpha(X, U) = A2 X + G2 U."""
    return form.slip_angles(X, U)


def _shared_matrices(p: VehicleParams):
    A1 = np.array([[0.0, -1.0], [0.0, 0.0]])
    G1 = -np.array([[1.0 / (p.m * p.v_x), 1.0 / (p.m * p.v_x)],
                    [p.l1 / p.I_z, -p.l2 / p.I_z]])
    A2 = np.array([[1.0, p.l1 / p.v_x], [1.0, -p.l2 / p.v_x]])
    G2 = -np.array([[1.0, 0.0], [0.0, float(p.chi)]])
    b = np.array([p.F_w / (p.m * p.v_x), p.l_w * p.F_w / p.I_z])
    return A1, G1, A2, G2, b


def _friction_pair(mu, g):
    mu = (_ones, _ones) if mu is None else mu
    g = (_ones, _ones) if g is None else g
    return tuple(mu), tuple(g)


def assemble_rigid(params: VehicleParams,
                   pressures: tuple[PressureProfile, PressureProfile] = None,
                   mu: tuple[FrictionFn, FrictionFn] = None,
                   g: tuple[FrictionFn, FrictionFn] = None) -> ModelForm:
    """Assemble the rigid-carcass parametrization.

    Friction coefficient functions ``mu`` and friction functions ``g`` are
    per-axle scalar callbacks of the slip angle; both default to constant 1.
    """
    p = params
    if pressures is None:
        pressures = (PressureProfile(), PressureProfile())
    mu, g = _friction_pair(mu, g)
    A1, G1, A2, G2, b = _shared_matrices(p)

    Lbar = p.characteristic_length("rigid")
    Lbar_i = np.array([p.L1, p.L2]) / Lbar
    sig0 = np.array([p.sigma0_1 * p.L1, p.sigma0_2 * p.L2])
    sig1 = np.array([p.sigma1_1 * p.L1, p.sigma1_2 * p.L2])
    sig2 = np.array([p.sigma2_1 * p.v_x, p.sigma2_2 * p.v_x])
    Fz = np.array([p.F_z1, p.F_z2])
    pr = pressures
    eps_reg = p.eps_reg

    def k1(xi):
        return np.stack([Fz[0] * sig0[0] * pr[0].value(xi),
                         Fz[1] * sig0[1] * pr[1].value(xi)])

    def k2(xi):
        return np.stack([Fz[0] * sig1[0] * pr[0].value(xi),
                         Fz[1] * sig1[1] * pr[1].value(xi)])

    def k3(xi):
        xi = np.asarray(xi, dtype=float)
        return np.zeros((2,) + xi.shape)

    k4 = k3

    def sigma(alpha):
        a = np.asarray(alpha, dtype=float)
        gv = np.array([g[0](a[0]), g[1](a[1])])
        return -sig0 * reg_abs(a, eps_reg) / (Lbar_i * gv)

    def h1(alpha):
        a = np.asarray(alpha, dtype=float)
        muv = np.array([mu[0](a[0]), mu[1](a[1])])
        gv = np.array([g[0](a[0]), g[1](a[1])])
        return 2.0 * Fz * (sig1 * muv / (Lbar_i * gv) + sig2) * a

    def h2(alpha):
        a = np.asarray(alpha, dtype=float)
        muv = np.array([mu[0](a[0]), mu[1](a[1])])
        gv = np.array([g[0](a[0]), g[1](a[1])])
        return 2.0 * muv * a / (Lbar_i * gv)

    return ModelForm(carcass="rigid", params=p, pressures=pressures,
                     A1=A1, A2=A2, G1=G1, G2=G2,
                     lam=1.0 / Lbar_i, Lbar=Lbar, Lbar_i=Lbar_i,
                     eps=Lbar / p.v_x,
                     k1=k1, k2=k2, k3=k3, k4=k4, k5=np.zeros(2),
                     sigma=sigma, h1=h1, h2=h2, b=b, mu=mu, g=g)


def assemble_flexible(params: VehicleParams,
                      pressures: tuple[PressureProfile, PressureProfile] = None,
                      mu: tuple[FrictionFn, FrictionFn] = None) -> ModelForm:
    """Assemble the flexible-carcass parametrization.

    Requires zero micro-damping and viscous coefficients (the flexible form
    is only defined for sigma1 = sigma2 = 0, which also forces g = mu).
    """
    p = params
    if any((p.sigma1_1, p.sigma1_2, p.sigma2_1, p.sigma2_2)):
        raise ConfigurationError(
            "flexible carcass requires sigma1_i = sigma2_i = 0")
    if pressures is None:
        pressures = (PressureProfile(), PressureProfile())
    mu, _ = _friction_pair(mu, None)
    A1, G1, A2, G2, b = _shared_matrices(p)

    Lbar = p.characteristic_length("flexible")
    Lbar_i = np.array([p.L1, p.L2]) / Lbar
    sig0 = np.array([p.sigma0_1 * p.L1, p.sigma0_2 * p.L2])
    Fz = np.array([p.F_z1, p.F_z2])
    psi = np.array([p.psi_1, p.psi_2])
    phi = np.array([p.phi_1, p.phi_2])
    pr = pressures
    eps_reg = p.eps_reg

    # Fail early if K4 cannot be formed.
    for prof in pr:
        prof.derivative(0.0)

    def k1(xi):
        return np.stack([Fz[0] * sig0[0] * pr[0].value(xi),
                         Fz[1] * sig0[1] * pr[1].value(xi)])

    def k2(xi):
        xi = np.asarray(xi, dtype=float)
        return np.zeros((2,) + xi.shape)

    def k3(xi):
        return -np.stack([psi[0] * pr[0].value(xi),
                          psi[1] * pr[1].value(xi)])

    def k4(xi):
        return -np.stack([psi[0] / Lbar_i[0] * pr[0].derivative(xi),
                          psi[1] / Lbar_i[1] * pr[1].derivative(xi)])

    k5 = np.array([psi[0] / Lbar_i[0] * float(pr[0].value(1.0)),
                   psi[1] / Lbar_i[1] * float(pr[1].value(1.0))])

    def sigma(alpha):
        a = np.asarray(alpha, dtype=float)
        muv = np.array([mu[0](a[0]), mu[1](a[1])])
        return -sig0 * reg_abs(a, eps_reg) / (Lbar_i * muv)

    def h1(alpha):
        return np.zeros(2)

    def h2(alpha):
        a = np.asarray(alpha, dtype=float)
        return 2.0 * phi / Lbar_i * a

    return ModelForm(carcass="flexible", params=p, pressures=pressures,
                     A1=A1, A2=A2, G1=G1, G2=G2,
                     lam=1.0 / Lbar_i, Lbar=Lbar, Lbar_i=Lbar_i,
                     eps=Lbar / p.v_x,
                     k1=k1, k2=k2, k3=k3, k4=k4, k5=k5,
                     sigma=sigma, h1=h1, h2=h2, b=b, mu=mu, g=(mu[0], mu[1]))


def assemble(params: VehicleParams, carcass: str = "flexible",
             pressures=None, mu=None, g=None) -> ModelForm:
    """Dispatch on carcass kind."""
    if carcass == "rigid":
        return assemble_rigid(params, pressures, mu=mu, g=g)
    if carcass == "flexible":
        return assemble_flexible(params, pressures, mu=mu)
    raise ConfigurationError(f"unknown carcass kind {carcass!r}")
