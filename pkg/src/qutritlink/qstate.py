"""Qutrit state types and the linear algebra shared by every other module.

Basis convention
----------------
OAM labels ``(-1, 0, +1)`` map to computational indices ``(0, 1, 2)``.
Two-photon vectors are row-major over ``(l_A, l_B)``, so index ``3*i + j``
holds the amplitude of ``|l_A = i-1>|l_B = j-1>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError

OAM_LABELS = (-1, 0, 1)
QUTRIT_DIM = 3

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8


def oam_index(ell: int) -> int:
    """Computational index of OAM label ``ell``."""
    if ell not in OAM_LABELS:
        raise ValueError(f"OAM label must be one of {OAM_LABELS}, got {ell}")
    return ell + 1


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


def _check_norm(amps: np.ndarray, what: str) -> None:
    norm = float(np.vdot(amps, amps).real)
    if abs(norm - 1.0) > NORM_TOL:
        raise InvariantError(f"{what} has squared norm {norm!r}, expected 1")


@dataclass(frozen=True, eq=False)
class QutritKet:
    """Normalized single-photon state over OAM labels (-1, 0, +1)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape != (QUTRIT_DIM,):
            raise InvariantError(f"QutritKet needs 3 amplitudes, got shape {amps.shape}")
        _check_norm(amps, "QutritKet")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "QutritKet":
        a = np.asarray(amplitudes, dtype=np.complex128)
        return cls(a / np.linalg.norm(a))

    @classmethod
    def basis(cls, ell: int) -> "QutritKet":
        a = np.zeros(QUTRIT_DIM, dtype=np.complex128)
        a[oam_index(ell)] = 1.0
        return cls(a)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def mirrored(self) -> "QutritKet":
        """The same superposition with every OAM label negated (l -> -l)."""
        return QutritKet(self.amplitudes[::-1])


@dataclass(frozen=True, eq=False)
class BipartiteKet:
    """Normalized two-photon state; amplitudes row-major over (l_A, l_B)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape != (QUTRIT_DIM**2,):
            raise InvariantError(f"BipartiteKet needs 9 amplitudes, got shape {amps.shape}")
        _check_norm(amps, "BipartiteKet")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "BipartiteKet":
        a = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(a / np.linalg.norm(a))

    @classmethod
    def from_terms(cls, terms: dict[tuple[int, int], complex], normalize: bool = True) -> "BipartiteKet":
        """Build from ``{(l_A, l_B): amplitude}``."""
        a = np.zeros(QUTRIT_DIM**2, dtype=np.complex128)
        for (la, lb), c in terms.items():
            a[QUTRIT_DIM * oam_index(la) + oam_index(lb)] += c
        return cls.normalized(a) if normalize else cls(a)

    @classmethod
    def product(cls, a: QutritKet, b: QutritKet) -> "BipartiteKet":
        return cls(np.kron(a.amplitudes, b.amplitudes))

    def coefficient_matrix(self) -> np.ndarray:
        """3x3 matrix ``C[i, j]`` with ``psi = sum C[i, j] |i>|j>``."""
        return self.amplitudes.reshape(QUTRIT_DIM, QUTRIT_DIM)

    def amplitude(self, ell_a: int, ell_b: int) -> complex:
        return complex(self.amplitudes[QUTRIT_DIM * oam_index(ell_a) + oam_index(ell_b)])

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix of size 3 or 9.

    Eigenvalues in ``(-1e-8, 0)`` are clamped to zero and the trace restored;
    anything more negative is rejected.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (3, 9):
            raise InvariantError(f"density matrix must be 3x3 or 9x9, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvariantError("density matrix has non-finite entries")
        herm_err = np.max(np.abs(m - m.conj().T))
        if herm_err > HERMITIAN_TOL:
            raise InvariantError(f"density matrix not Hermitian (max deviation {herm_err:.3e})")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantError(f"density matrix trace is {tr!r}, expected 1")
        w, v = np.linalg.eigh(m)
        if w[0] < -PSD_TOL:
            raise InvariantError(f"density matrix has eigenvalue {w[0]:.3e} below -{PSD_TOL}")
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            w /= w.sum()
            m = (v * w) @ v.conj().T
            m = 0.5 * (m + m.conj().T)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_bipartite(self) -> bool:
        return self.dim == QUTRIT_DIM**2

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    @classmethod
    def from_ket(cls, ket: QutritKet | BipartiteKet) -> "DensityMatrix":
        return cls(ket.projector())

    @classmethod
    def maximally_mixed(cls, dim: int = 9) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def from_psd(cls, a: np.ndarray) -> "DensityMatrix":
        """Normalize a positive semidefinite matrix to unit trace."""
        a = np.asarray(a, dtype=np.complex128)
        a = 0.5 * (a + a.conj().T)
        return cls(a / np.trace(a).real)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix))


def as_matrix(rho) -> np.ndarray:
    """Return the raw ndarray of a DensityMatrix or array-like."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=np.complex128)


def as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def as_amplitudes(psi) -> np.ndarray:
    if isinstance(psi, (QutritKet, BipartiteKet)):
        return psi.amplitudes
    return np.asarray(psi, dtype=np.complex128).reshape(-1)


# The nine qutrit operators of the process-matrix expansion, in order.
GELL_MANN = np.array(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [1, 0, 0], [0, 0, 0]],
        [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]],
        [[1, 0, 0], [0, -1, 0], [0, 0, 0]],
        [[0, 0, 1], [0, 0, 0], [1, 0, 0]],
        [[0, 0, -1j], [0, 0, 0], [1j, 0, 0]],
        [[0, 0, 0], [0, 0, 1], [0, 1, 0]],
        [[0, 0, 0], [0, 0, -1j], [0, 1j, 0]],
        np.array([[1, 0, 0], [0, 1, 0], [0, 0, -2]]) / np.sqrt(3),
    ],
    dtype=np.complex128,
)
GELL_MANN.flags.writeable = False


def gell_mann_gram() -> np.ndarray:
    """``G[m, n] = Tr(lambda_m^dagger lambda_n)``; diagonal (3, 2, ..., 2)."""
    return np.einsum("mab,nab->mn", GELL_MANN.conj(), GELL_MANN)


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``psi = sum_i coefficients[i] * left[i] (x) right[i]`` with descending coefficients."""

    coefficients: np.ndarray
    left: list[QutritKet] = field(default_factory=list)
    right: list[QutritKet] = field(default_factory=list)

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if np.any(c < 0) or np.any(np.diff(c) > 0):
            raise InvariantError("Schmidt coefficients must be nonnegative and descending")
        if abs(np.sum(c**2) - 1.0) > 1e-9:
            raise InvariantError("squared Schmidt coefficients must sum to 1")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > 1e-12))

    def reconstruct(self) -> BipartiteKet:
        amps = sum(
            lam * np.kron(u.amplitudes, v.amplitudes)
            for lam, u, v in zip(self.coefficients, self.left, self.right)
        )
        return BipartiteKet.normalized(amps)


def mes_state(theta: float, phi: float) -> BipartiteKet:
    """(e^{i theta}|-1,1> + |0,0> + e^{i phi}|1,-1>) / sqrt(3)."""
    return BipartiteKet.from_terms(
        {(-1, 1): np.exp(1j * theta), (0, 0): 1.0, (1, -1): np.exp(1j * phi)}
    )


def schmidt_decompose(psi: BipartiteKet) -> SchmidtDecomposition:
    u, s, vh = np.linalg.svd(psi.coefficient_matrix())
    s = s / np.linalg.norm(s)
    left = [QutritKet(u[:, i]) for i in range(QUTRIT_DIM)]
    right = [QutritKet(vh[i, :]) for i in range(QUTRIT_DIM)]
    return SchmidtDecomposition(s, left, right)


def fidelity_pure(rho, psi) -> float:
    """<psi|rho|psi>, clamped to [0, 1]."""
    m = as_matrix(rho)
    v = as_amplitudes(psi)
    if m.shape != (v.size, v.size):
        raise ValueError(f"dimension mismatch: rho {m.shape} vs ket of size {v.size}")
    f = float(np.vdot(v, m @ v).real)
    return min(max(f, 0.0), 1.0)


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    # eigenvalues at the rounding floor would contribute sqrt(eps) ~ 1e-8 otherwise
    w = np.where(w > 16 * np.finfo(float).eps * max(w[-1], 0.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """(Tr sqrt(sqrt(a) b sqrt(a)))^2 for positive semidefinite, unit-trace ``a`` and ``b``.

    Evaluated as the squared trace norm of ``sqrt(a) sqrt(b)``.
    """
    s = np.linalg.svd(_sqrt_psd(a) @ _sqrt_psd(b), compute_uv=False)
    f = float(np.sum(s) ** 2)
    return min(max(f, 0.0), 1.0)


def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity between two density matrices of equal size."""
    a, b = as_matrix(rho), as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return uhlmann_fidelity(a, b)


def purity(rho) -> float:
    m = as_matrix(rho)
    # Tr(rho^2) for Hermitian rho is the squared Frobenius norm
    return float(np.sum(np.abs(m) ** 2))


def partial_trace(rho, trace_out: str = "B") -> DensityMatrix:
    """Reduced 3x3 state after tracing out subsystem ``'A'`` or ``'B'``."""
    m = as_matrix(rho)
    if m.shape != (9, 9):
        raise ValueError("partial_trace needs a 9x9 bipartite matrix")
    t = m.reshape(3, 3, 3, 3)
    if trace_out == "B":
        red = np.einsum("ajbj->ab", t)
    elif trace_out == "A":
        red = np.einsum("jajb->ab", t)
    else:
        raise ValueError("trace_out must be 'A' or 'B'")
    return DensityMatrix(red)


def random_ket(rng: np.random.Generator, dim: int = 9) -> np.ndarray:
    """Haar-random normalized vector."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density_matrix(rng: np.random.Generator, dim: int = 9, rank: int | None = None) -> DensityMatrix:
    """Random state from the induced (Ginibre) measure; full rank by default."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    return DensityMatrix.from_psd(g @ g.conj().T)
