"""The nine single-photon analysis states behind the 81 tomography settings."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..qstate import QutritKet

CONVENTIONS = ("main", "table")

_S = 1 / np.sqrt(2)

# Amplitudes on (-1, 0, +1).
_MAIN = (
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (_S, _S, 0),  # (|0> + |-1>)/sqrt2
    (0, _S, _S),  # (|0> + |1>)/sqrt2
    (1j * _S, _S, 0),  # (|0> + i|-1>)/sqrt2
    (0, _S, -1j * _S),  # (|0> - i|1>)/sqrt2
    (_S, 0, _S),  # (|-1> + |1>)/sqrt2
    (_S, 0, 1j * _S),  # (|-1> + i|1>)/sqrt2
)

# Column captions of the published count table; settings 6 and 8 differ.
_TABLE = _MAIN[:6] + (
    (-1j * _S, _S, 0),  # (|0> - i|-1>)/sqrt2
    (_S, 0, _S),  # (|1> + |-1>)/sqrt2
    (-1j * _S, 0, _S),  # (|1> - i|-1>)/sqrt2
)

LABELS = {
    "main": ("|-1>", "|0>", "|1>", "(|0>+|-1>)/v2", "(|0>+|1>)/v2", "(|0>+i|-1>)/v2",
             "(|0>-i|1>)/v2", "(|-1>+|1>)/v2", "(|-1>+i|1>)/v2"),
    "table": ("|-1>", "|0>", "|1>", "(|0>+|-1>)/v2", "(|0>+|1>)/v2", "(|0>+i|-1>)/v2",
              "(|0>-i|-1>)/v2", "(|1>+|-1>)/v2", "(|1>-i|-1>)/v2"),
}


@dataclass(frozen=True, eq=False)
class ProjectorSet:
    """Nine analysis kets; setting ``k`` projects onto ``kets[k]``.

    ``mirrored`` marks a set whose kets have had every OAM label negated,
    which is how a phase-flattening analyser that displays the conjugate
    hologram labels its settings.
    """

    kets: tuple[QutritKet, ...]
    convention: str = "main"
    mirrored: bool = False

    def __post_init__(self):
        if len(self.kets) != 9:
            raise ValueError(f"a projector set has 9 kets, got {len(self.kets)}")

    def projectors(self) -> np.ndarray:
        """Array of shape (9, 3, 3)."""
        return np.array([k.projector() for k in self.kets])

    def gram(self) -> np.ndarray:
        """Hilbert-Schmidt overlaps ``Tr(p_k p_l)`` of the nine projectors."""
        p = self.projectors()
        return np.einsum("kab,lba->kl", p, p).real

    @property
    def informationally_complete(self) -> bool:
        return bool(np.linalg.matrix_rank(self.gram(), tol=1e-9) == 9)

    def as_mirrored(self) -> "ProjectorSet":
        return ProjectorSet(tuple(k.mirrored() for k in self.kets), self.convention, not self.mirrored)

    @property
    def labels(self) -> tuple[str, ...]:
        return LABELS[self.convention]


def build_projector_set(convention: str = "main", mirrored: bool = False) -> ProjectorSet:
    """Return the nine analysis states.

    Parameters
    ----------
    convention : {"main", "table"}
        ``"main"`` is the informationally complete list used for the 81
        settings. ``"table"`` follows the captions printed above the count
        table, whose seventh state makes the set incomplete (rank 8).
    mirrored : bool
        Negate every OAM label (see :class:`ProjectorSet`).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown projector convention {convention!r}; use one of {CONVENTIONS}")
    amps = _MAIN if convention == "main" else _TABLE
    ps = ProjectorSet(tuple(QutritKet(np.array(a, dtype=complex)) for a in amps), convention)
    return ps.as_mirrored() if mirrored else ps
