"""Single-qutrit channels of the fibre link: dispersion dephasing and mode crosstalk."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import InvariantError
from ..qstate import DensityMatrix, as_matrix

SPEED_OF_LIGHT = 299_792_458.0
TP_TOL = 1e-9

# parity projectors: |0> is even, |+-1> are odd
P_EVEN = np.diag([0.0, 1.0, 0.0]).astype(np.complex128)
P_ODD = np.diag([1.0, 0.0, 1.0]).astype(np.complex128)

PERMUTATIONS = tuple(np.eye(3)[list(p)] for p in itertools.permutations(range(3)))


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Trace-preserving Kraus representation ``rho -> sum_i K_i rho K_i^dagger``."""

    kraus: tuple
    label: str = ""

    def __post_init__(self):
        ks = tuple(np.array(k, dtype=np.complex128) for k in self.kraus)
        if not ks or any(k.shape != (3, 3) for k in ks):
            raise InvariantError("a qutrit channel needs at least one 3x3 Kraus operator")
        defect = np.max(np.abs(sum(k.conj().T @ k for k in ks) - np.eye(3)))
        if defect > TP_TOL:
            raise InvariantError(f"Kraus operators are not trace preserving (defect {defect:.2e})")
        for k in ks:
            k.flags.writeable = False
        object.__setattr__(self, "kraus", ks)

    def apply(self, rho) -> np.ndarray:
        r = as_matrix(rho)
        return sum(k @ r @ k.conj().T for k in self.kraus)

    def then(self, other: "QuantumChannel") -> "QuantumChannel":
        """This channel followed by ``other``."""
        ks = [b @ a for a in self.kraus for b in other.kraus]
        return QuantumChannel(tuple(ks), f"{self.label}|{other.label}".strip("|"))

    @classmethod
    def identity(cls) -> "QuantumChannel":
        return cls((np.eye(3),), "identity")


def coherence_time(bandwidth: float, wavelength: float) -> float:
    """Coherence time ``lambda0^2 / (c * dlambda)`` in seconds (inputs in metres)."""
    if bandwidth <= 0 or wavelength <= 0:
        raise ValueError("bandwidth and wavelength must be positive")
    return wavelength**2 / (SPEED_OF_LIGHT * bandwidth)


@dataclass(frozen=True)
class LinkParameters:
    """Fibre-link knobs.

    Attributes
    ----------
    tau_disp : float
        Group delay between even and odd OAM parity, seconds.
    tau_comp : float
        Precompensation delay, seconds; the residual is ``tau_disp - tau_comp``.
    bandwidth : float
        Filter bandwidth, metres.
    wavelength : float
        Centre wavelength, metres.
    crosstalk : float
        Mode-mixing weight in [0, 1].
    """

    tau_disp: float = 2.4e-9
    tau_comp: float = 0.0
    bandwidth: float = 0.5e-9
    wavelength: float = 1550e-9
    crosstalk: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.tau_disp) and np.isfinite(self.tau_comp)):
            raise ValueError("delays must be finite")
        if not self.bandwidth > 0 or not self.wavelength > 0:
            raise ValueError("bandwidth and wavelength must be positive")
        if not 0.0 <= self.crosstalk <= 1.0:
            raise ValueError("crosstalk must lie in [0, 1]")

    @property
    def tau_eff(self) -> float:
        return self.tau_disp - self.tau_comp

    @property
    def coherence_time(self) -> float:
        return coherence_time(self.bandwidth, self.wavelength)

    @property
    def gamma(self) -> float:
        """Surviving fraction of even/odd parity coherence, ``exp(-(tau_eff / t_c)^2)``."""
        return float(np.exp(-((self.tau_eff / self.coherence_time) ** 2)))


def parity_dephasing(gamma: float) -> QuantumChannel:
    """Multiply even/odd parity coherences by ``gamma``; everything else untouched."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    z = P_EVEN - P_ODD
    return QuantumChannel((np.sqrt((1 + gamma) / 2) * np.eye(3), np.sqrt((1 - gamma) / 2) * z),
                          f"dephasing(gamma={gamma:.6g})")


def dephasing_channel(p: LinkParameters) -> QuantumChannel:
    return parity_dephasing(p.gamma)


def crosstalk_channel(eps: float) -> QuantumChannel:
    """``rho -> (1 - eps) rho + eps * mean over the 6 label permutations of P rho P^T``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("crosstalk must lie in [0, 1]")
    ks = [np.sqrt(1 - eps) * np.eye(3)] + [np.sqrt(eps / 6) * p for p in PERMUTATIONS]
    return QuantumChannel(tuple(ks), f"crosstalk(eps={eps:.6g})")


def apply_channel(rho, ch: QuantumChannel, side: str = "B") -> DensityMatrix:
    """Apply a single-qutrit channel to one half of a 9x9 state."""
    if side not in ("A", "B"):
        raise ValueError("side must be 'A' or 'B'")
    if not isinstance(ch, QuantumChannel):
        ch = QuantumChannel(tuple(ch))
    r = as_matrix(rho)
    if r.shape != (9, 9):
        raise ValueError("apply_channel needs a 9x9 bipartite state")
    eye = np.eye(3)
    lifted = [np.kron(eye, k) if side == "B" else np.kron(k, eye) for k in ch.kraus]
    out = sum(k @ r @ k.conj().T for k in lifted)
    return DensityMatrix(0.5 * (out + out.conj().T))
