"""Bundled witness figures of merit for one reconstructed two-qutrit state."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from ..qstate import as_matrix, mes_state, purity
from .cglmp import cglmp_optimize
from .fidelity import best_mes_fidelity, certify_dimension, schmidt_rank_bound


@dataclass(frozen=True)
class WitnessReport:
    """Fidelity witness and CGLMP summary.

    ``f1_bound`` and ``f2_bound`` are the Schmidt-rank 1 and 2 overlap bounds
    of the best-matching MES; ``i3_settings`` is the JSON form of the
    optimal settings (``None`` when I3 was not evaluated).
    """

    fidelity: float
    theta: float
    phi: float
    purity: float
    certified_dimension: int
    f1_bound: float
    f2_bound: float
    i3: float | None = None
    i3_settings: dict | None = None

    def __post_init__(self):
        if not self.f1_bound <= self.f2_bound <= 1.0 + 1e-12:
            raise ValueError("witness bounds must satisfy F1 <= F2 <= 1")
        if self.certified_dimension not in (1, 2, 3):
            raise ValueError("certified dimension must be 1, 2 or 3")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)


def witness_report(rho, *, with_cglmp: bool = True, cglmp_family: str = "unitary",
                   n_starts: int = 32, seed: int = 0) -> WitnessReport:
    """Evaluate every witness on ``rho`` (9x9)."""
    m = as_matrix(rho)
    f, theta, phi = best_mes_fidelity(m)
    target = mes_state(theta, phi)
    i3, settings = None, None
    if with_cglmp:
        opt = cglmp_optimize(m, family=cglmp_family, n_starts=n_starts, seed=seed)
        i3, settings = float(opt.value), opt.settings.to_dict()
    return WitnessReport(
        fidelity=float(f),
        theta=float(theta),
        phi=float(phi),
        purity=float(purity(m)),
        certified_dimension=certify_dimension(m, target),
        f1_bound=schmidt_rank_bound(target, 1),
        f2_bound=schmidt_rank_bound(target, 2),
        i3=i3,
        i3_settings=settings,
    )
