"""Single-qutrit process tomography in the nine-operator basis.

A channel is written ``rho_out = sum_mn chi[m, n] L_m rho_in L_n^dagger`` with
``L_m = GELL_MANN[m]`` (``L_0`` is the identity, so the identity channel has
``chi[0, 0] = 1`` and nothing else). The basis is orthogonal but not
normalized (``Tr L_0^2 = 3``, the others 2), so ``Tr chi`` is not 1 in general.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvariantError, ReconstructionError
from ..qstate import GELL_MANN, DensityMatrix, as_matrix, gell_mann_gram, uhlmann_fidelity
from .projectors import build_projector_set

TP_TOL = 1e-6

_NORMS = np.sqrt(np.diag(gell_mann_gram()).real)


def tp_defect(chi: np.ndarray) -> np.ndarray:
    """``sum_mn chi[m, n] L_n^dagger L_m``; the identity for a trace-preserving map."""
    return np.einsum("mn,nba,mbc->ac", chi, GELL_MANN.conj(), GELL_MANN)


@dataclass(frozen=True, eq=False)
class ProcessMatrix:
    """Hermitian, positive semidefinite, trace-preserving 9x9 process matrix.

    ``fit_residual`` is the Frobenius residual of the linear inversion and
    ``tp_residual`` the trace-preservation defect before correction; both are
    zero for matrices built directly from Kraus operators.
    """

    chi: np.ndarray
    fit_residual: float = 0.0
    tp_residual: float = 0.0

    def __post_init__(self):
        c = np.array(self.chi, dtype=np.complex128)
        if c.shape != (9, 9):
            raise InvariantError(f"process matrix must be 9x9, got {c.shape}")
        if np.max(np.abs(c - c.conj().T)) > 1e-10:
            raise InvariantError("process matrix is not Hermitian")
        c = 0.5 * (c + c.conj().T)
        if np.linalg.eigvalsh(c)[0] < -1e-8:
            raise InvariantError("process matrix is not completely positive")
        resid = np.linalg.norm(tp_defect(c) - np.eye(3))
        if resid > TP_TOL:
            raise InvariantError(f"process matrix is not trace preserving (residual {resid:.2e})")
        c.flags.writeable = False
        object.__setattr__(self, "chi", c)

    def apply(self, rho) -> np.ndarray:
        return apply_process(self.chi, rho)

    def kraus(self) -> list[np.ndarray]:
        return kraus_from_chi(self.chi)


def apply_process(chi: np.ndarray, rho) -> np.ndarray:
    r = as_matrix(rho)
    return np.einsum("mn,mab,bc,ndc->ad", chi, GELL_MANN, r, GELL_MANN.conj())


def chi_from_kraus(kraus) -> np.ndarray:
    """Process matrix of the channel ``rho -> sum_i K_i rho K_i^dagger``."""
    ks = np.asarray(kraus, dtype=np.complex128).reshape(-1, 3, 3)
    # orthogonal basis: coefficient of L_m in K is Tr(L_m^dagger K) / Tr(L_m^dagger L_m)
    coeff = np.einsum("mab,iab->im", GELL_MANN.conj(), ks) / _NORMS**2
    return np.einsum("im,in->mn", coeff, coeff.conj())


def kraus_from_chi(chi: np.ndarray, tol: float = 1e-14) -> list[np.ndarray]:
    w, v = np.linalg.eigh(0.5 * (chi + chi.conj().T))
    return [np.sqrt(wi) * np.einsum("m,mab->ab", v[:, i], GELL_MANN) for i, wi in enumerate(w) if wi > tol]


def identity_process() -> ProcessMatrix:
    chi = np.zeros((9, 9), dtype=np.complex128)
    chi[0, 0] = 1.0
    return ProcessMatrix(chi)


def _inv_sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if w[0] <= 1e-12:
        raise ReconstructionError("process annihilates part of the state space; cannot restore trace")
    return (v / np.sqrt(w)) @ v.conj().T


def default_inputs() -> list[DensityMatrix]:
    """The nine analysis states, used as preparation states."""
    return [DensityMatrix.from_ket(k) for k in build_projector_set().kets]


def process_reconstruct(outputs, inputs=None) -> ProcessMatrix:
    """Process matrix from prepared inputs and their tomographed outputs.

    Linear inversion on the nine-operator basis, then the nearest CP matrix
    by eigenvalue truncation, then trace preservation restored by
    ``K_i -> K_i M^{-1/2}`` with ``M = sum K_i^dagger K_i``.

    Parameters
    ----------
    outputs : sequence of 3x3 density matrices
    inputs : sequence of 3x3 density matrices, optional
        Defaults to :func:`default_inputs` (same order as ``outputs``).
    """
    inputs = default_inputs() if inputs is None else inputs
    rin = np.array([as_matrix(r) for r in inputs])
    rout = np.array([as_matrix(r) for r in outputs])
    if rin.shape != rout.shape or rin.shape[1:] != (3, 3):
        raise ValueError("inputs and outputs must be equally many 3x3 matrices")
    # design[k, a, b, m, n] = (L_m rho_k L_n^dagger)[a, b]
    design = np.einsum("mac,kcd,nbd->kabmn", GELL_MANN, rin, GELL_MANN.conj())
    design = design.reshape(-1, 81)
    if np.linalg.matrix_rank(design, tol=1e-9) < 81:
        raise ReconstructionError("input states do not span the operator space (rank-deficient design)")
    target = rout.reshape(-1)
    sol, *_ = np.linalg.lstsq(design, target, rcond=None)
    fit_residual = float(np.linalg.norm(design @ sol - target))
    chi = sol.reshape(9, 9)
    chi = 0.5 * (chi + chi.conj().T)

    w, v = np.linalg.eigh(chi)
    chi = (v * np.clip(w, 0.0, None)) @ v.conj().T
    tp_residual = float(np.linalg.norm(tp_defect(chi) - np.eye(3)))

    ks = kraus_from_chi(chi)
    if not ks:
        raise ReconstructionError("reconstructed process is identically zero")
    m = sum(k.conj().T @ k for k in ks)
    fix = _inv_sqrt_psd(m)
    chi = chi_from_kraus([k @ fix for k in ks])
    return ProcessMatrix(chi, fit_residual=fit_residual, tp_residual=tp_residual)


def _normalized_chi(chi: np.ndarray, raw: bool) -> np.ndarray:
    c = np.asarray(chi, dtype=np.complex128)
    if not raw:
        c = c * np.outer(_NORMS, _NORMS)
    tr = np.trace(c).real
    if tr <= 0:
        raise InvariantError("process matrix has nonpositive trace")
    c = c / tr
    if np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0] < -1e-8:
        raise InvariantError("process matrix is not positive semidefinite")
    return c


def process_fidelity(chi, chi0, raw: bool = False) -> float:
    """Uhlmann fidelity ``[Tr sqrt(sqrt(chi) chi0 sqrt(chi))]^2`` of unit-trace process matrices.

    By default both matrices are first expressed in the orthonormal
    rescaling of the operator basis, which makes the value basis independent
    (it equals the fidelity of the normalized Choi states; ``|Tr U|^2 / 9``
    against the identity for a unitary ``U``). ``raw=True`` normalizes the
    matrices as given instead.
    """
    a = chi.chi if isinstance(chi, ProcessMatrix) else chi
    b = chi0.chi if isinstance(chi0, ProcessMatrix) else chi0
    return uhlmann_fidelity(_normalized_chi(a, raw), _normalized_chi(b, raw))
