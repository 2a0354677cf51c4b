"""Shared uniform grid and quadrature used by every module.

All spatial quantities live on N+1 uniformly spaced nodes over [0, 1].
Quadrature is an endpoint-corrected trapezoidal (Gregory) rule so that the
steady-state force maps reach ~1e-9 relative accuracy at N = 200 while the
nodes remain exactly the finite-difference grid of the PDE simulator.
"""

from __future__ import annotations

import numpy as np

# Gregory endpoint corrections (two correction nodes, O(h^4) error).
_GREGORY_EDGE = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])


def uniform_grid(n_cells: int) -> np.ndarray:
    """N+1 nodes of the uniform grid on [0, 1]."""
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    return np.linspace(0.0, 1.0, n_cells + 1)


def quad_weights(n_cells: int) -> np.ndarray:
    """Quadrature weights on the uniform grid.

    Gregory-corrected trapezoid for n_cells >= 8, plain trapezoid otherwise
    (too few nodes for distinct corrections).  All weights are positive, so
    the rule also defines a valid discrete L2 norm.
    """
    h = 1.0 / n_cells
    w = np.full(n_cells + 1, h)
    if n_cells >= 8:
        w[:3] = _GREGORY_EDGE * h
        w[-3:] = _GREGORY_EDGE[::-1] * h
    else:
        w[0] = 0.5 * h
        w[-1] = 0.5 * h
    return w


def grid_l2_norm(values: np.ndarray, weights: np.ndarray) -> float:
    """Discrete L2((0,1)) norm of a grid function.

    `values` has shape (..., N+1); the norm is taken over all leading axes
    jointly (vector-valued profiles sum component squares).
    """
    return float(np.sqrt(np.sum(values * values * weights)))
