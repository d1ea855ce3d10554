"""Bookkeeping between OAM-polarization states and LP11-group fibre vector modes.

Vector-mode order is ``(HE21 even, HE21 odd, TM01, TE01)``. OAM states are
labelled ``(l, s)`` with ``l = +-1`` and circular polarization ``s = +-1``:

    OAM(+1, +1) = (HE_even + i HE_odd) / sqrt2
    OAM(-1, -1) = (HE_even - i HE_odd) / sqrt2
    OAM(+1, -1) = (TM + i TE) / sqrt2
    OAM(-1, +1) = (TM - i TE) / sqrt2
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VECTOR_MODES = ("HE21_even", "HE21_odd", "TM01", "TE01")
OAM_STATES = ((1, 1), (-1, -1), (1, -1), (-1, 1))

_S = 1 / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class FiberModeMap:
    """Unitary whose column ``k`` holds the vector-mode amplitudes of ``OAM_STATES[k]``."""

    matrix: np.ndarray

    def __post_init__(self):
        u = np.array(self.matrix, dtype=np.complex128)
        if u.shape != (4, 4) or np.max(np.abs(u.conj().T @ u - np.eye(4))) > 1e-12:
            raise ValueError("fibre mode map must be a 4x4 unitary")
        u.flags.writeable = False
        object.__setattr__(self, "matrix", u)

    @classmethod
    def standard(cls) -> "FiberModeMap":
        u = _S * np.array([
            [1, 1, 0, 0],
            [1j, -1j, 0, 0],
            [0, 0, 1, 1],
            [0, 0, 1j, -1j],
        ])
        return cls(u)


_MAP = FiberModeMap.standard()


def _oam_slot(ell: int, pol: int) -> int:
    if ell not in (1, -1):
        raise ValueError(f"only |l| = 1 lives in the LP11 group, got l = {ell}")
    if pol not in (1, -1):
        raise ValueError(f"polarization must be +1 or -1, got {pol}")
    return OAM_STATES.index((ell, pol))


def oam_to_fiber(ell: int, pol: int, mode_map: FiberModeMap = _MAP) -> np.ndarray:
    """Vector-mode amplitudes ``(HE even, HE odd, TM, TE)`` of ``OAM(ell, pol)``."""
    return mode_map.matrix[:, _oam_slot(ell, pol)].copy()


def fiber_to_oam(amplitudes, mode_map: FiberModeMap = _MAP) -> np.ndarray:
    """OAM amplitudes (ordered as ``OAM_STATES``) of a vector-mode superposition."""
    v = np.asarray(amplitudes, dtype=np.complex128).reshape(4)
    return mode_map.matrix.conj().T @ v
