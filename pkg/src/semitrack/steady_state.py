"""Steady bristle profiles, the force map, equilibria and linearizations.

For a frozen slip-angle vector y the steady profile phi(., y) solves the
nonlocal two-point problem

    Lambda dphi/dxi = Sigma(y)[phi + K3 phi] + K4 phi + h2(y),  phi(0) = 0,

which decouples componentwise.  Each component obeys a scalar linear ODE
phi' = a phi + c whose constant c depends on three scalar functionals of the
solution (the pressure-weighted integral, the trailing-edge value and the
pressure-slope integral); the solver wraps the closed-form exponential
solution in a fixed-point iteration on those functionals.  For a rigid
carcass the functionals never enter and the closed form is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .grid import quad_weights, uniform_grid
from .model import ModelForm

_FP_TOL = 1e-12
_FP_MAX_ITER = 200


@dataclass(frozen=True)
class BristleProfile:
    """Steady bristle deflection sampled on the uniform grid."""

    xi: np.ndarray        # N+1 nodes
    values: np.ndarray    # shape (2, N+1); values[:, 0] == 0
    y: np.ndarray         # slip-angle argument


def _profile_shape(a: float, xi: np.ndarray) -> np.ndarray:
    """Solution of u' = a u + 1, u(0) = 0 on the grid."""
    if a == 0.0:
        return xi.copy()
    return np.expm1(a * xi) / a


def solve_phi(y, form: ModelForm, n_cells: int) -> BristleProfile:
    """Steady bristle profile phi(., y) on an N+1-node grid.

    Rigid carcass: exact per-node evaluation of the closed-form exponential.
    Flexible carcass: fixed-point iteration on the scalar functionals
    (integral of p*phi, phi(1), integral of p'*phi) around the closed-form
    local solve; converged when successive values differ by < 1e-12.
    """
    if n_cells < 16:
        raise ValueError("n_cells must be >= 16")
    y = np.asarray(y, dtype=float)
    xi = uniform_grid(n_cells)
    w = quad_weights(n_cells)
    sig = form.sigma(y)
    h2 = form.h2(y)
    psi = np.array([form.params.psi_1, form.params.psi_2])
    values = np.zeros((2, n_cells + 1))

    pbar = [form.pressures[i].value(xi) for i in range(2)]
    nonlocal_needed = form.carcass == "flexible" and np.any(psi > 0.0)
    dpbar = ([form.pressures[i].derivative(xi) for i in range(2)]
             if nonlocal_needed else [np.zeros_like(xi)] * 2)
    p_end = [float(form.pressures[i].value(1.0)) for i in range(2)]

    for i in range(2):
        a = form.Lbar_i[i] * sig[i]
        u = _profile_shape(a, xi)
        base = form.Lbar_i[i] * h2[i]
        if not nonlocal_needed or psi[i] == 0.0:
            values[i] = base * u
            continue
        # phi = c * u; iterate the functionals (I_p, phi(1), I_dp).
        funcs = np.zeros(3)
        c = base
        for _ in range(_FP_MAX_ITER):
            i_p, phi1, i_dp = funcs
            c = base + form.Lbar_i[i] * (
                sig[i] * (-psi[i] * i_p)
                + psi[i] / form.Lbar_i[i] * (p_end[i] * phi1 - i_dp))
            phi = c * u
            new = np.array([w @ (pbar[i] * phi), phi[-1],
                            w @ (dpbar[i] * phi)])
            if np.max(np.abs(new - funcs)) < _FP_TOL:
                funcs = new
                break
            funcs = new
        else:
            raise NumericalError(
                f"steady bristle fixed point for component {i + 1} did not "
                f"contract within {_FP_MAX_ITER} iterations (dissipativity "
                f"violated for the supplied parameters)")
        values[i] = c * u
    return BristleProfile(xi=xi, values=values, y=y)


def force_map(y, form: ModelForm, n_cells: int) -> np.ndarray:
    """Steady tire-force map Phi(y) = K1 phi + Sigma(y) K2 phi + h1(y)."""
    prof = solve_phi(y, form, n_cells)
    w = quad_weights(n_cells)
    k1 = form.k1(prof.xi)
    out = (k1 * prof.values) @ w
    if form.carcass == "rigid":
        k2 = form.k2(prof.xi)
        out = out + form.sigma(prof.y) * ((k2 * prof.values) @ w)
    return out + form.h1(prof.y)


class ForceMapEvaluator:
    """Precomputed repeated evaluation of the steady force map Phi.

    Exploits that the nonlocal functionals are linear in the profile, so
    the fixed point of ``solve_phi`` has the closed form c = base/(1 - k);
    grid arrays are assembled once.  Agrees with ``force_map`` to the
    fixed-point tolerance and is meant for per-step use inside integrators.
    """

    def __init__(self, form: ModelForm, n_cells: int):
        self.form = form
        self.xi = uniform_grid(n_cells)
        w = quad_weights(n_cells)
        self.k1w = form.k1(self.xi) * w
        self.k2w = form.k2(self.xi) * w if form.carcass == "rigid" else None
        psi = np.array([form.params.psi_1, form.params.psi_2])
        self.nonlocal_needed = form.carcass == "flexible" and np.any(psi > 0)
        if self.nonlocal_needed:
            pbar = np.stack([form.pressures[i].value(self.xi)
                             for i in range(2)])
            dpbar = np.stack([form.pressures[i].derivative(self.xi)
                              for i in range(2)])
            self.pw = pbar * w
            self.dpw = dpbar * w
            self.p_end = np.array([float(form.pressures[i].value(1.0))
                                   for i in range(2)])
            self.psi = psi

    def profile(self, y) -> np.ndarray:
        """Steady bristle profile on the grid, shape (2, N+1)."""
        form = self.form
        y = np.asarray(y, dtype=float)
        sig = form.sigma(y)
        a = form.Lbar_i * sig
        u = np.stack([_profile_shape(a[0], self.xi),
                      _profile_shape(a[1], self.xi)])
        c = form.Lbar_i * form.h2(y)
        if self.nonlocal_needed:
            kappa = (-form.Lbar_i * sig * self.psi * (self.pw * u).sum(1)
                     + self.psi * (self.p_end * u[:, -1]
                                   - (self.dpw * u).sum(1)))
            denom = 1.0 - kappa
            if np.any(np.abs(denom) < 1e-12):
                raise NumericalError(
                    "steady bristle profile is singular for the supplied "
                    "parameters")
            c = c / denom
        return c[:, None] * u

    def force(self, y) -> np.ndarray:
        """Phi(y) = K1 phi + Sigma(y) K2 phi + h1(y)."""
        y = np.asarray(y, dtype=float)
        phi = self.profile(y)
        out = (self.k1w * phi).sum(1)
        if self.k2w is not None:
            out = out + self.form.sigma(y) * (self.k2w * phi).sum(1)
        return out + self.form.h1(y)


def phi_slip_derivative(alpha_star, form: ModelForm,
                        n_cells: int) -> np.ndarray:
    """d phi_i / d y_i (xi, alpha_star), shape (2, N+1).

    Central finite differences; at a slip-angle kink (eps_reg = 0 at
    y_i = 0) this is the symmetric average of the one-sided slopes.
    """
    alpha_star = np.asarray(alpha_star, dtype=float)
    out = np.zeros((2, n_cells + 1))
    for i in range(2):
        h = max(1e-6, 1e-6 * abs(alpha_star[i]))
        yp = alpha_star.copy()
        ym = alpha_star.copy()
        yp[i] += h
        ym[i] -= h
        out[i] = (solve_phi(yp, form, n_cells).values[i]
                  - solve_phi(ym, form, n_cells).values[i]) / (2.0 * h)
    return out


def cornering_stiffness(alpha_star, form: ModelForm,
                        n_cells: int) -> np.ndarray:
    """Generalized cornering stiffness matrix dPhi/dy at alpha_star.

    Central finite difference per component with step
    h = max(1e-6, 1e-6 |alpha_i|); returns the 2x2 diagonal matrix.  At the
    |.|-kink the central difference realizes the symmetric derivative.
    """
    alpha_star = np.asarray(alpha_star, dtype=float)
    diag = np.zeros(2)
    for i in range(2):
        h = max(1e-6, 1e-6 * abs(alpha_star[i]))
        yp = alpha_star.copy()
        ym = alpha_star.copy()
        yp[i] += h
        ym[i] -= h
        fp = force_map(yp, form, n_cells)
        fm = force_map(ym, form, n_cells)
        if not (np.isfinite(fp[i]) and np.isfinite(fm[i])):
            raise NumericalError(
                f"non-finite force values while differentiating component "
                f"{i + 1} at alpha = {alpha_star}")
        diag[i] = (fp[i] - fm[i]) / (2.0 * h)
    return np.diag(diag)


@dataclass(frozen=True)
class Equilibrium:
    """Equilibrium triple with its linearization products."""

    X_star: np.ndarray
    z_star: BristleProfile
    alpha_star: np.ndarray
    F_star: np.ndarray
    U_star: np.ndarray
    Ctilde: np.ndarray
    A1tilde: np.ndarray
    G1tilde: np.ndarray
    residual: float


def equilibrium_residual(X, U_star, b, form: ModelForm,
                         n_cells: int) -> np.ndarray:
    """Reduced equilibrium residual A1 X + G1 Phi(alpha(X, U*)) + b."""
    alpha = form.slip_angles(X, U_star)
    return form.A1 @ X + form.G1 @ force_map(alpha, form, n_cells) + b


def find_equilibrium(U_star, b, form: ModelForm, n_cells: int,
                     X0=None, tol: float = 1e-10,
                     max_iter: int = 100) -> Equilibrium:
    """Damped Newton solve of the reduced equilibrium equations.

    Backtracks by step halving (at most 30 halvings) until the residual
    decreases; raises NumericalError carrying the last residual if the
    iteration stagnates.
    """
    U_star = np.asarray(U_star, dtype=float)
    b = np.asarray(b, dtype=float)
    X = np.zeros(2) if X0 is None else np.asarray(X0, dtype=float).copy()

    res = equilibrium_residual(X, U_star, b, form, n_cells)
    for _ in range(max_iter):
        nrm = np.max(np.abs(res))
        if nrm < tol:
            break
        alpha = form.slip_angles(X, U_star)
        jac = form.A1 + form.G1 @ cornering_stiffness(
            alpha, form, n_cells) @ form.A2
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular equilibrium Jacobian: {exc}")
        lam = 1.0
        for _ in range(30):
            X_new = X + lam * step
            res_new = equilibrium_residual(X_new, U_star, b, form, n_cells)
            if np.max(np.abs(res_new)) < nrm:
                break
            lam *= 0.5
        else:
            raise NumericalError(
                f"equilibrium Newton stagnated; residual inf-norm {nrm:.3e}")
        X, res = X_new, res_new
    else:
        raise NumericalError(
            f"equilibrium Newton did not converge in {max_iter} iterations; "
            f"residual inf-norm {np.max(np.abs(res)):.3e}")

    alpha = form.slip_angles(X, U_star)
    z_star = solve_phi(alpha, form, n_cells)
    F_star = force_map(alpha, form, n_cells)
    Ct = cornering_stiffness(alpha, form, n_cells)
    return Equilibrium(
        X_star=X, z_star=z_star, alpha_star=alpha, F_star=F_star,
        U_star=U_star, Ctilde=Ct,
        A1tilde=form.A1 + form.G1 @ Ct @ form.A2,
        G1tilde=form.G1 @ Ct @ form.G2,
        residual=float(np.max(np.abs(res))))


def slip_derivative_bound(form: ModelForm, n_cells: int,
                          y_box: float = 0.3, samples: int = 9) -> float:
    """Numerical estimate of max |d phi / d y| over a box of slip angles.

    Diagnostic only; nothing is asserted about a global bound.
    """
    best = 0.0
    for yv in np.linspace(-y_box, y_box, samples):
        d = phi_slip_derivative(np.array([yv, yv]), form, n_cells)
        best = max(best, float(np.max(np.abs(d))))
    return best
