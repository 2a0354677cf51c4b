"""Physical parameters and contact-patch pressure profiles."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable

import numpy as np

from .errors import ConfigurationError

#: Fields that must be strictly positive.
_POSITIVE = (
    "v_x", "m", "I_z", "l1", "l2", "F_z1", "F_z2",
    "L1", "L2", "sigma0_1", "sigma0_2",
)
#: Fields that must be nonnegative.
_NONNEGATIVE = ("sigma1_1", "sigma1_2", "sigma2_1", "sigma2_2", "eps_reg")

LBAR_RULES = ("mean", "harmonic")


@dataclass(frozen=True)
class VehicleParams:
    """All physical constants of the benchmark vehicle (SI units).

    Defaults reproduce the oversteer passenger-car configuration used for
    the numerical experiments shipped with this package.
    """

    v_x: float = 50.0          # longitudinal speed [m/s]
    m: float = 1300.0          # mass [kg]
    I_z: float = 2000.0        # yaw inertia [kg m^2]
    l1: float = 1.4            # front axle distance [m]
    l2: float = 1.0            # rear axle distance [m]
    F_z1: float = 2660.0       # front vertical load [N]
    F_z2: float = 3720.0       # rear vertical load [N]
    F_w: float = 0.0           # lateral wind force [N]
    l_w: float = 0.0           # wind force offset [m]
    L1: float = 0.11           # front contact patch length [m]
    L2: float = 0.09           # rear contact patch length [m]
    sigma0_1: float = 240.0    # front micro-stiffness [1/m]
    sigma0_2: float = 269.0    # rear micro-stiffness [1/m]
    sigma1_1: float = 0.0      # front micro-damping
    sigma1_2: float = 0.0      # rear micro-damping
    sigma2_1: float = 0.0      # front viscous coefficient
    sigma2_2: float = 0.0      # rear viscous coefficient
    phi_1: float = 0.92        # front carcass structural parameter
    phi_2: float = 0.92        # rear carcass structural parameter
    chi: int = 0               # rear-steer actuation flag
    eps_reg: float = 0.0       # |.| regularization parameter
    Lbar_rule: str = "mean"    # characteristic-length rule

    def __post_init__(self):
        for name in _POSITIVE:
            if not getattr(self, name) > 0.0:
                raise ConfigurationError(f"parameter '{name}' must be > 0, "
                                         f"got {getattr(self, name)!r}")
        for name in _NONNEGATIVE:
            if getattr(self, name) < 0.0:
                raise ConfigurationError(f"parameter '{name}' must be >= 0, "
                                         f"got {getattr(self, name)!r}")
        for name in ("phi_1", "phi_2"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigurationError(f"parameter '{name}' must lie in "
                                         f"(0, 1], got {v!r}")
        if self.chi not in (0, 1):
            raise ConfigurationError(f"parameter 'chi' must be 0 or 1, "
                                     f"got {self.chi!r}")
        if self.Lbar_rule not in LBAR_RULES:
            raise ConfigurationError(
                f"parameter 'Lbar_rule' must be one of {LBAR_RULES}, "
                f"got {self.Lbar_rule!r}")

    @property
    def psi_1(self) -> float:
        return 1.0 - self.phi_1

    @property
    def psi_2(self) -> float:
        return 1.0 - self.phi_2

    @property
    def relaxation_lengths(self) -> tuple[float, float]:
        """Constant-pressure relaxation lengths L_i / phi_i."""
        return self.L1 / self.phi_1, self.L2 / self.phi_2

    def characteristic_length(self, carcass: str) -> float:
        """Characteristic contact length L_bar for the given carcass kind.

        Rigid carcass averages the patch lengths, flexible carcass the
        relaxation lengths; `Lbar_rule` selects arithmetic-mean or
        harmonic-style averaging.
        """
        if carcass == "rigid":
            a, b = self.L1, self.L2
        elif carcass == "flexible":
            a, b = self.relaxation_lengths
        else:
            raise ConfigurationError(f"unknown carcass kind {carcass!r}")
        if self.Lbar_rule == "mean":
            return 0.5 * (a + b)
        return a * b / (a + b)

    def replace(self, **kwargs) -> "VehicleParams":
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update(kwargs)
        return VehicleParams(**current)


def _normalized_exponential(rate: float):
    # p(xi) = c exp(-rate xi) with integral 1 over [0, 1]
    c = rate / -np.expm1(-rate)
    val = lambda xi: c * np.exp(-rate * np.asarray(xi, dtype=float))
    der = lambda xi: -rate * c * np.exp(-rate * np.asarray(xi, dtype=float))
    return val, der


@dataclass(frozen=True)
class PressureProfile:
    """Nondimensional vertical pressure distribution over the patch.

    kind:
      * ``constant``: p(xi) = 1.
      * ``exponential``: decreasing p(xi) = c exp(-rate xi), normalized so
        the total load integrates to 1.
      * ``tabulated``: user-supplied callables ``fun`` (and ``dfun`` for the
        derivative, required by the flexible-carcass kernels).
    """

    kind: str = "constant"
    rate: float = 0.0
    fun: Callable[[np.ndarray], np.ndarray] | None = None
    dfun: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "exponential", "tabulated"):
            raise ConfigurationError(
                f"unknown pressure profile kind {self.kind!r}")
        if self.kind == "exponential" and not self.rate > 0.0:
            raise ConfigurationError(
                "exponential pressure profile needs rate > 0")
        if self.kind == "tabulated" and self.fun is None:
            raise ConfigurationError("tabulated pressure profile needs 'fun'")

    def value(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.kind == "constant":
            return np.ones_like(xi)
        if self.kind == "exponential":
            return _normalized_exponential(self.rate)[0](xi)
        return np.asarray(self.fun(xi), dtype=float)

    def derivative(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(xi)
        if self.kind == "exponential":
            return _normalized_exponential(self.rate)[1](xi)
        if self.dfun is None:
            raise ConfigurationError(
                "tabulated pressure profile has no derivative; the "
                "flexible-carcass kernels need dp/dxi")
        return np.asarray(self.dfun(xi), dtype=float)
