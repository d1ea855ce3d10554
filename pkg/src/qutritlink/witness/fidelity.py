"""Fidelity-based certification of the entanglement dimension."""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from ..qstate import BipartiteKet, as_matrix, fidelity_pure, mes_state, schmidt_decompose

TWO_PI = 2 * np.pi

# indices of |-1,1>, |0,0>, |1,-1> in the row-major two-photon basis
_MES_SLOTS = [2, 4, 6]


def _mes_fidelity_grid(sub: np.ndarray, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    et, ep = np.exp(1j * theta), np.exp(1j * phi)
    f = np.trace(sub).real + 2 * np.real(
        np.conj(et) * sub[0, 1] + np.conj(et) * ep * sub[0, 2] + sub[1, 2] * ep
    )
    return f / 3.0


def best_mes_fidelity(rho, grid: int = 256) -> tuple[float, float, float]:
    """Largest overlap with the MES family and its phases ``(F, theta, phi)``.

    Grid search over ``[0, 2pi)^2`` followed by Nelder-Mead from the best
    grid point; angles are returned in ``[0, 2pi)``.
    """
    m = as_matrix(rho)
    if m.shape != (9, 9):
        raise ValueError("best_mes_fidelity needs a 9x9 state")
    sub = m[np.ix_(_MES_SLOTS, _MES_SLOTS)]
    axis = np.arange(grid) * (TWO_PI / grid)
    th, ph = np.meshgrid(axis, axis, indexing="ij")
    vals = _mes_fidelity_grid(sub, th, ph)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    res = minimize(lambda x: -_mes_fidelity_grid(sub, x[0], x[1]), [axis[i], axis[j]],
                   method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000})
    theta, phi = np.mod(res.x, TWO_PI)
    f = fidelity_pure(m, mes_state(theta, phi))
    if f < vals[i, j]:
        theta, phi, f = axis[i], axis[j], fidelity_pure(m, mes_state(axis[i], axis[j]))
    return f, float(theta), float(phi)


def schmidt_rank_bound(target: BipartiteKet, d: int) -> float:
    """Maximal overlap of ``target`` with any state of Schmidt rank ``d``.

    Equals the sum of the ``d`` largest squared Schmidt coefficients.
    """
    if not 1 <= d <= 3:
        raise ValueError(f"Schmidt rank must be 1, 2 or 3, got {d}")
    lam = schmidt_decompose(target).coefficients
    return float(min(np.sum(lam[:d] ** 2), 1.0))


def certify_dimension(rho, target: BipartiteKet, tol: float = 1e-9) -> int:
    """Entanglement dimension certified by the fidelity witness.

    Returns ``d + 1`` for the largest ``d`` whose Schmidt-rank bound the
    measured fidelity beats by more than ``tol``, or 1 if it beats none.
    """
    f = fidelity_pure(rho, target)
    certified = 1
    for d in (1, 2):
        if f > schmidt_rank_bound(target, d) + tol:
            certified = d + 1
    return certified
