"""Poisson bootstrap error bars for any statistic of the reconstructed state."""
from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..errors import ReconstructionError
from ..qstate import DensityMatrix, purity
from .counts import CoincidenceTable
from .mle import mle_reconstruct
from .projectors import ProjectorSet

log = logging.getLogger(__name__)

Resampler = Callable[[np.ndarray, np.random.Generator], np.ndarray]


def poisson_resampler(counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return rng.poisson(counts)


@dataclass(frozen=True)
class BootstrapResult:
    """Bootstrap summary; array-valued statistics give array-valued fields."""

    mean: float | np.ndarray
    std: float | np.ndarray
    values: np.ndarray
    failures: int
    point_estimate: float | np.ndarray

    def __iter__(self):
        # unpacks as (mean, std)
        yield self.mean
        yield self.std


def bootstrap_uncertainty(
    table: CoincidenceTable,
    projectors: ProjectorSet | None = None,
    n_resamples: int = 100,
    statistic: Callable[[DensityMatrix], float | np.ndarray] = purity,
    *,
    seed: int = 0,
    resampler: Resampler = poisson_resampler,
    restarts: int = 1,
    **mle_kwargs,
) -> BootstrapResult:
    """Mean and sample standard deviation of ``statistic`` over resampled tables.

    Each count is redrawn as ``Poisson(n_ij)`` (or by ``resampler``), the
    state is re-estimated, warm-started at the point estimate, and
    ``statistic`` evaluated (it may return a scalar or a 1-D array). Resamples whose reconstruction fails are
    skipped and counted in ``failures``.
    """
    if n_resamples < 2:
        raise ValueError("n_resamples must be >= 2")
    rng = np.random.default_rng(seed)
    point = mle_reconstruct(table, projectors, seed=seed, **mle_kwargs)
    values = []
    failures = 0
    for _ in range(n_resamples):
        counts = resampler(table.counts, rng)
        try:
            fit = mle_reconstruct(table.with_counts(counts), projectors, restarts=restarts,
                                  initial=point.rho, seed=seed, **mle_kwargs)
        except ReconstructionError as exc:
            log.warning("bootstrap resample failed: %s", exc)
            failures += 1
            continue
        values.append(np.asarray(statistic(fit.rho), dtype=float))
    if len(values) < 2:
        raise ReconstructionError(f"only {len(values)} of {n_resamples} resamples reconstructed")
    vals = np.array(values)
    return BootstrapResult(
        mean=_scalar(vals.mean(axis=0)),
        std=_scalar(vals.std(axis=0, ddof=1)),
        values=vals,
        failures=failures,
        point_estimate=_scalar(np.asarray(statistic(point.rho), dtype=float)),
    )


def _scalar(a: np.ndarray) -> float | np.ndarray:
    return float(a) if a.ndim == 0 else a
