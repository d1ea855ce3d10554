"""Maximum-likelihood reconstruction of two-qutrit states from coincidence counts.

The state is parameterized as ``rho = T^dagger T / Tr(T^dagger T)`` with ``T``
lower triangular (81 real parameters), so every iterate is a valid density
matrix. Counts are modelled as independent Poisson variables with mean
``N * p_ij``; the flux ``N`` is profiled out analytically
(``N = sum(n) / sum(p)``), which leaves

    L(rho) = sum_ij n_ij ln p_ij - n ln sum_ij p_ij      (+ const)

to be maximized with L-BFGS from several seeded starts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..errors import ConvergenceError, ReconstructionError
from ..qstate import DensityMatrix, as_matrix
from .counts import CoincidenceTable
from .projectors import ProjectorSet, build_projector_set

log = logging.getLogger(__name__)

DIM = 9
_TRIL = np.tril_indices(DIM)
_OFF = np.tril_indices(DIM, k=-1)
_P_FLOOR = 1e-300


def measurement_operators(
    alice: ProjectorSet,
    bob: ProjectorSet | None = None,
    efficiencies=None,
) -> np.ndarray:
    """Two-photon POVM elements, shape (81, 9, 9), setting pair ``(i, j)`` at ``9*i + j``.

    ``efficiencies`` optionally gives per-mode detection weights on (-1, 0, +1),
    either one triple shared by both parties or a pair ``(alice, bob)``;
    each analysis projector becomes ``D p D`` with ``D = diag(sqrt(eta))``.
    """
    bob = alice if bob is None else bob
    pa, pb = alice.projectors(), bob.projectors()
    if efficiencies is not None:
        eff = np.asarray(efficiencies, dtype=float)
        ea, eb = (eff, eff) if eff.ndim == 1 else (eff[0], eff[1])
        if np.any(ea < 0) or np.any(eb < 0):
            raise ValueError("efficiencies must be nonnegative")
        da, db = np.sqrt(ea), np.sqrt(eb)
        pa = pa * np.outer(da, da)
        pb = pb * np.outer(db, db)
    return np.einsum("iab,jcd->ijacbd", pa, pb).reshape(81, DIM, DIM)


def predicted_probabilities(rho, alice: ProjectorSet | None = None, bob: ProjectorSet | None = None,
                            efficiencies=None) -> np.ndarray:
    """9x9 array of ``Tr[rho (p_i (x) p_j)]``."""
    alice = build_projector_set() if alice is None else alice
    m = measurement_operators(alice, bob, efficiencies)
    r = as_matrix(rho)
    return np.einsum("kab,ba->k", m, r).real.reshape(9, 9)


def predicted_probability(rho, i: int, j: int, alice: ProjectorSet | None = None,
                          bob: ProjectorSet | None = None) -> float:
    if not (0 <= i < 9 and 0 <= j < 9):
        raise IndexError("setting indices must lie in 0..8")
    return float(predicted_probabilities(rho, alice, bob)[i, j])


def params_to_t(x: np.ndarray) -> np.ndarray:
    t = np.zeros((DIM, DIM), dtype=np.complex128)
    t[_TRIL] = x[: _TRIL[0].size]
    t[_OFF] += 1j * x[_TRIL[0].size :]
    return t


def t_to_params(t: np.ndarray) -> np.ndarray:
    return np.concatenate([t[_TRIL].real, t[_OFF].imag])


def params_to_rho(x: np.ndarray) -> np.ndarray:
    t = params_to_t(x)
    a = t.conj().T @ t
    return a / np.trace(a).real


def rho_to_params(rho: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """Parameters whose state is ``rho`` regularized by ``floor * I`` (keeps T invertible)."""
    r = as_matrix(rho) + floor * np.eye(DIM)
    # lower-triangular T with T^dagger T = r, from the Cholesky factor of J r^T J
    j = np.eye(DIM)[::-1]
    lower = np.linalg.cholesky(j @ r.T @ j)
    t = (j @ lower @ j).T
    return t_to_params(t)


def log_likelihood(rho, table: CoincidenceTable, operators: np.ndarray) -> tuple[float, float]:
    """Poisson log-likelihood ``sum n ln(N p) - N p`` at the profiled flux; returns ``(L, N)``."""
    n = table.counts.reshape(-1).astype(float)
    p = np.einsum("kab,ba->k", operators, as_matrix(rho)).real
    scale = n.sum() / p.sum()
    mu = scale * p
    mask = n > 0
    ll = float(np.sum(n[mask] * np.log(np.maximum(mu[mask], _P_FLOOR))) - mu.sum())
    return ll, float(scale)


class _Objective:
    """Negative profiled log-likelihood in the T parameters, with gradient."""

    def __init__(self, counts: np.ndarray, operators: np.ndarray):
        self.n = counts.reshape(-1).astype(float)
        self.ntot = self.n.sum()
        self.mask = self.n > 0
        self.op_flat = operators.reshape(81, DIM * DIM)
        # p_k = Re sum_ab conj(M_k[a, b]) A[a, b] for Hermitian M_k, A
        self.op_conj = self.op_flat.conj()

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        t = params_to_t(x)
        a = t.conj().T @ t
        tr = np.trace(a).real
        q = (self.op_conj @ a.reshape(-1)).real
        q = np.maximum(q, _P_FLOOR)
        qtot = q.sum()
        ll = np.sum(self.n[self.mask] * np.log(q[self.mask])) - self.ntot * np.log(qtot)
        # the likelihood is scale invariant in A; pin Tr(A) near 1 for conditioning
        pen = (tr - 1.0) ** 2
        w = self.n / q - self.ntot / qtot
        r = (w @ self.op_flat).reshape(DIM, DIM)
        r = -r + 2.0 * (tr - 1.0) * np.eye(DIM)
        g = (r @ t.conj().T).T
        grad_t = 2.0 * g
        grad = np.concatenate([grad_t[_TRIL].real, -grad_t[_OFF].imag])
        return float(-ll + pen), grad


@dataclass(frozen=True)
class MLEResult:
    """Outcome of :func:`mle_reconstruct`.

    ``scale`` is the fitted flux ``N`` (expected total counts per unit
    probability); ``log_likelihood`` excludes the ``ln n!`` constant.
    """

    rho: DensityMatrix
    scale: float
    log_likelihood: float
    restart_log_likelihoods: tuple[float, ...] = field(default_factory=tuple)
    iterations: int = 0
    failed_restarts: int = 0


def _resolve_projectors(table: CoincidenceTable, projectors: ProjectorSet | None,
                        bob_projectors: ProjectorSet | None) -> tuple[ProjectorSet, ProjectorSet]:
    alice = projectors if projectors is not None else build_projector_set(table.projector_convention)
    if bob_projectors is not None:
        return alice, bob_projectors
    bob = alice.as_mirrored() if table.bob_frame == "mirrored" else alice
    return alice, bob


def mle_reconstruct(
    table: CoincidenceTable,
    projectors: ProjectorSet | None = None,
    *,
    bob_projectors: ProjectorSet | None = None,
    efficiencies=None,
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 5000,
    initial=None,
) -> MLEResult:
    """Maximum-likelihood two-qutrit state for a 9x9 coincidence table.

    Parameters
    ----------
    table : CoincidenceTable
        Raw counts, rows Alice, columns Bob.
    projectors : ProjectorSet, optional
        Alice's analysis states; defaults to the table's declared convention.
    bob_projectors : ProjectorSet, optional
        Bob's analysis states. Defaults to ``projectors``, mirrored when the
        table metadata declares ``bob_frame: mirrored``.
    efficiencies : array_like, optional
        Per-mode detection weights, see :func:`measurement_operators`.
    restarts : int
        Number of optimizer starts. Start 0 is ``initial`` (or the maximally
        mixed state); the rest are drawn from ``np.random.default_rng(seed)``.
    max_iter : int
        L-BFGS iteration cap per start.
    initial : DensityMatrix or array, optional
        Warm start, e.g. the point estimate when bootstrapping.

    Raises
    ------
    ReconstructionError
        If the table has no counts.
    ConvergenceError
        If the best start stopped at the iteration cap.
    """
    if table.total <= 0:
        raise ReconstructionError("coincidence table has no counts")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    alice, bob = _resolve_projectors(table, projectors, bob_projectors)
    ops = measurement_operators(alice, bob, efficiencies)
    objective = _Objective(table.counts, ops)

    rng = np.random.default_rng(seed)
    x_first = rho_to_params(np.eye(DIM) / DIM if initial is None else as_matrix(initial))
    starts = [x_first] + [rng.normal(size=81) for _ in range(restarts - 1)]

    results = []
    for k, x0 in enumerate(starts):
        res = minimize(objective, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "maxfun": 20 * max_iter, "ftol": 1e-15, "gtol": 1e-9})
        hit_cap = res.status == 1
        if hit_cap:
            log.warning("MLE start %d stopped at the iteration cap (%d)", k, res.nit)
        results.append((res, hit_cap))

    # best likelihood wins, earliest start breaks ties
    order = sorted(range(len(results)), key=lambda k: (results[k][0].fun, k))
    best, best_capped = results[order[0]]
    if best_capped:
        raise ConvergenceError(
            f"MLE did not converge within {max_iter} iterations",
            {"nit": best.nit, "fun": float(best.fun), "message": str(best.message)},
        )
    rho = DensityMatrix(params_to_rho(best.x))
    ll, scale = log_likelihood(rho, table, ops)
    restart_ll = tuple(log_likelihood(params_to_rho(r.x), table, ops)[0] for r, _ in results)
    return MLEResult(
        rho=rho,
        scale=scale,
        log_likelihood=ll,
        restart_log_likelihoods=restart_ll,
        iterations=int(best.nit),
        failed_restarts=sum(1 for _, capped in results if capped),
    )
