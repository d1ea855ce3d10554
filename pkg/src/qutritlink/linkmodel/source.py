"""Post-selected SPDC source state over the anticorrelated OAM pairs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import InvariantError
from ..qstate import NORM_TOL, BipartiteKet


@dataclass(frozen=True)
class SpiralCoefficients:
    """Amplitudes ``C00``, ``C1m1`` (for ``|1,-1>``) and ``Cm11`` (for ``|-1,1>``)."""

    c00: complex
    c1m1: complex
    cm11: complex

    def __post_init__(self):
        norm = abs(self.c00) ** 2 + abs(self.c1m1) ** 2 + abs(self.cm11) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise InvariantError(f"spiral coefficients have squared norm {norm!r}, expected 1")

    @classmethod
    def normalized(cls, c00: complex, c1m1: complex, cm11: complex) -> "SpiralCoefficients":
        norm = np.sqrt(abs(c00) ** 2 + abs(c1m1) ** 2 + abs(cm11) ** 2)
        if norm == 0:
            raise ValueError("at least one spiral coefficient must be nonzero")
        return cls(complex(c00) / norm, complex(c1m1) / norm, complex(cm11) / norm)

    @classmethod
    def ideal(cls) -> "SpiralCoefficients":
        return cls.normalized(1.0, 1.0, 1.0)


def spdc_state(c: SpiralCoefficients) -> BipartiteKet:
    """``C00|0,0> + C1m1|1,-1> + Cm11|-1,1>``."""
    return BipartiteKet.from_terms({(0, 0): c.c00, (1, -1): c.c1m1, (-1, 1): c.cm11}, normalize=False)


def source_for_fidelity(target: float) -> SpiralCoefficients:
    """Real source ``(sqrt(1 - 2x^2), x, x)`` whose best-MES fidelity equals ``target``.

    For real nonnegative amplitudes the best MES overlap is
    ``(sum |C|)^2 / 3``, which rises monotonically from 1/3 at ``x = 0`` to
    1 at ``x = 1/sqrt(3)``.
    """
    if not 1.0 / 3.0 <= target <= 1.0:
        raise ValueError("a pure anticorrelated source has best-MES fidelity in [1/3, 1]")

    def fid(x: float) -> float:
        return (np.sqrt(max(1.0 - 2.0 * x * x, 0.0)) + 2.0 * x) ** 2 / 3.0

    xmax = 1.0 / np.sqrt(3.0)
    if target >= fid(xmax):
        return SpiralCoefficients.ideal()
    x = brentq(lambda v: fid(v) - target, 0.0, xmax, xtol=1e-15)
    return SpiralCoefficients.normalized(np.sqrt(1.0 - 2.0 * x * x), x, x)
