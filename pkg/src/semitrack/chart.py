"""Linearized generator of the full interconnection and stability charts.

The linearization is carried out in deviation coordinates (X_delta, zeta)
with zeta(xi, t) = z(xi, t) - phi(xi, alpha(X, U*)).  In these coordinates
the slip-dependence of the source terms collapses onto the slip derivative
of the steady profile (differentiating the steady equation in y shows the
remaining source-Jacobian terms cancel exactly), so the generator reads

    d/dt [X_delta]   [ A_XX  A_Xz ] [X_delta]
         [ zeta  ] = [ A_zX  A_zz ] [ zeta  ]

    A_XX = A1 + G1 Ctilde A2
    A_Xz = G1 (K1 + Sigma(a*) K2) <quadrature rows>
    A_zX = -(dphi/dy) A2 A_XX
    A_zz = (1/eps) L_h - (dphi/dy) A2 A_Xz

where L_h is the homogeneous transport-plus-source operator discretized by
the same upwind differences and quadrature as the simulator.  The pinned
boundary node (zeta = 0 at xi = 0) is eliminated, so the matrix has size
2 + 2N for N cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import NumericalError, SemitrackError
from .grid import quad_weights, uniform_grid
from .model import ModelForm, assemble
from .params import VehicleParams
from .steady_state import Equilibrium, find_equilibrium, phi_slip_derivative


@dataclass(frozen=True)
class LinearGenerator:
    """Dense generator matrix with its provenance metadata."""

    matrix: np.ndarray
    n_cells: int
    equilibrium: Equilibrium
    carcass: str
    meta: dict = field(default_factory=dict)


def _homogeneous_block(alpha, form: ModelForm, n_cells: int) -> np.ndarray:
    """Upwind discretization of the homogeneous transport-source operator.

    Acts on the 2N interior nodes (node 0 eliminated by the boundary
    condition); block-diagonal per component apart from nothing -- the
    nonlocal kernels stay componentwise so the two N x N blocks decouple.
    """
    alpha = np.asarray(alpha, dtype=float)
    xi = uniform_grid(n_cells)
    w = quad_weights(n_cells)
    dxi = 1.0 / n_cells
    sig = form.sigma(alpha)
    k3w = form.k3(xi) * w
    k4w = form.k4(xi) * w
    n = n_cells
    out = np.zeros((2 * n, 2 * n))
    for i in range(2):
        blk = np.zeros((n, n))
        # transport: -(lam/dxi) (I - lower shift), with the eliminated
        # node 0 contributing nothing to the first interior row
        lam = form.lam[i]
        blk -= (lam / dxi) * np.eye(n)
        blk[1:, :-1] += (lam / dxi) * np.eye(n - 1)
        # local source
        blk += sig[i] * np.eye(n)
        # nonlocal source: identical rank-one row added to every node
        row = sig[i] * k3w[i, 1:] + k4w[i, 1:]
        row = row.copy()
        row[-1] += form.k5[i]
        if np.any(row):
            blk += np.ones((n, 1)) @ row[None, :]
        sl = slice(i * n, (i + 1) * n)
        out[sl, sl] = blk
    return out


def _force_rows(alpha, form: ModelForm, n_cells: int) -> np.ndarray:
    """Quadrature rows M (2 x 2N) with forces(zeta) = M zeta."""
    alpha = np.asarray(alpha, dtype=float)
    xi = uniform_grid(n_cells)
    w = quad_weights(n_cells)
    sig = form.sigma(alpha)
    k1w = form.k1(xi) * w
    k2w = form.k2(xi) * w
    n = n_cells
    M = np.zeros((2, 2 * n))
    for i in range(2):
        M[i, i * n:(i + 1) * n] = k1w[i, 1:] + sig[i] * k2w[i, 1:]
    return M


def boundary_layer_operator(alpha, form: ModelForm,
                            n_cells: int) -> np.ndarray:
    """Generator of the frozen-slip layer dynamics in stretched time."""
    return _homogeneous_block(alpha, form, n_cells)


def assemble_generator(eq: Equilibrium, form: ModelForm,
                       n_cells: int) -> LinearGenerator:
    """Dense linearization of the full interconnection about ``eq``."""
    if eq.residual > 1e-6:
        raise NumericalError(
            f"equilibrium residual {eq.residual:.3e} too large to linearize")
    n = n_cells
    alpha = eq.alpha_star
    A_XX = eq.A1tilde
    M = _force_rows(alpha, form, n)
    A_Xz = form.G1 @ M
    dphi = phi_slip_derivative(alpha, form, n)[:, 1:]   # (2, N)
    # stack the per-component derivative diagonals into a (2N x 2) map
    # zeta-row sensitivity: row (i, j) couples to A2[i, :] scaled by dphi
    D = np.zeros((2 * n, 2))
    for i in range(2):
        D[i * n:(i + 1) * n, :] = dphi[i][:, None] * form.A2[i][None, :]
    A_zX = -D @ A_XX
    A_zz = _homogeneous_block(alpha, form, n) / form.eps - D @ A_Xz

    gen = np.zeros((2 + 2 * n, 2 + 2 * n))
    gen[:2, :2] = A_XX
    gen[:2, 2:] = A_Xz
    gen[2:, :2] = A_zX
    gen[2:, 2:] = A_zz
    return LinearGenerator(
        matrix=gen, n_cells=n, equilibrium=eq, carcass=form.carcass,
        meta={"eps": form.eps, "Lbar": form.Lbar,
              "Lbar_rule": form.params.Lbar_rule, "v_x": form.params.v_x})


def spectrum(gen) -> np.ndarray:
    """All eigenvalues of a generator (dense solve), sorted by real part."""
    mat = gen.matrix if isinstance(gen, LinearGenerator) else np.asarray(gen)
    if not np.isfinite(mat).all():
        raise NumericalError("generator matrix contains non-finite entries")
    try:
        eig = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigensolver failed: {exc}; matrix norm "
            f"{np.linalg.norm(mat):.3e}, size {mat.shape[0]}")
    return eig[np.argsort(-eig.real)]


def max_real_part(gen) -> float:
    return float(spectrum(gen)[0].real)


@dataclass(frozen=True)
class ChartCell:
    understeer_index: float
    v_x: float
    max_real_part: float
    stable: bool
    error: str = ""


def front_stiffness_for_index(index: float, params: VehicleParams) -> float:
    """Front micro-stiffness realizing a target zero-slip understeer index.

    The zero-slip stiffness is C_i = F_zi sigma0_i L_i for both carcass
    kinds with constant pressure, so the index C1 l1 / (C2 l2) is linear in
    sigma0_1.
    """
    c2 = params.F_z2 * params.sigma0_2 * params.L2
    return index * c2 * params.l2 / (params.F_z1 * params.L1 * params.l1)


def _evaluate_cell(args):
    index, v_x, base_tuple, carcass, n_cells = args
    base = VehicleParams(**base_tuple)
    try:
        p = base.replace(v_x=v_x,
                         sigma0_1=front_stiffness_for_index(index, base))
        form = assemble(p, carcass=carcass)
        eq = find_equilibrium(np.zeros(2), np.zeros(2), form, n_cells)
        top = max_real_part(assemble_generator(eq, form, n_cells))
        return ChartCell(understeer_index=index, v_x=v_x,
                         max_real_part=top, stable=top < 0.0)
    except SemitrackError as exc:
        return ChartCell(understeer_index=index, v_x=v_x,
                         max_real_part=np.nan, stable=False, error=str(exc))


def sweep_chart(index_values, vx_values, base_params: VehicleParams,
                carcass: str = "flexible", n_cells: int = 50,
                jobs: int = 1) -> list[ChartCell]:
    """Stability verdict grid over (understeer index, speed).

    Cells are independent; per-cell failures are captured in the cell's
    ``error`` field and the sweep continues.  Output order is row-major
    (index outer, speed inner) regardless of the worker count.
    """
    from dataclasses import asdict
    base_tuple = asdict(base_params)
    tasks = [(float(i), float(v), base_tuple, carcass, n_cells)
             for i in index_values for v in vx_values]
    if jobs <= 1:
        return [_evaluate_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate_cell, tasks))
