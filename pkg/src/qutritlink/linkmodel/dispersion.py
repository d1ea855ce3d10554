"""Intermodal delay from coincidence-versus-delay scans.

Each curve is normalized to its maximum and fitted with
``a * exp(-(t - t0)^2 / (2 w^2)) + c``; the delay between parities is the
difference of the fitted centres.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

from ..errors import FitError, TableFormatError

SCAN_COLUMNS = ("delay_s", "rate_00", "rate_m11")
MIN_POINTS = 5


@dataclass(frozen=True)
class GaussianFit:
    amplitude: float
    center: float
    width: float
    offset: float


def gaussian(t, amplitude, center, width, offset):
    return amplitude * np.exp(-0.5 * ((t - center) / width) ** 2) + offset


def _initial_guess(t: np.ndarray, y: np.ndarray) -> list[float]:
    k = int(np.argmax(y))
    lo, hi = float(y.min()), float(y.max())
    above = t[y >= lo + 0.5 * (hi - lo)]
    fwhm = float(above.max() - above.min()) if above.size > 1 else float(np.median(np.diff(np.sort(t))))
    return [hi - lo, float(t[k]), max(fwhm, 1e-12) / 2.355, lo]


def fit_gaussian(delays, rates) -> GaussianFit:
    """Least-squares Gaussian fit of one normalized coincidence curve."""
    t = np.asarray(delays, dtype=float)
    y = np.asarray(rates, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("delays and rates must be 1-D arrays of equal length")
    if t.size < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} scan points, got {t.size}")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
        raise FitError("scan contains non-finite values")
    peak = np.max(np.abs(y))
    if peak == 0 or np.ptp(y) <= 1e-9 * peak:
        raise FitError("scan is flat; no peak to fit")
    y = y / y.max()
    # fit in units of the scan span for conditioning
    t0, scale = float(t.mean()), float(np.ptp(t))
    u = (t - t0) / scale
    try:
        popt, _ = curve_fit(gaussian, u, y, p0=_initial_guess(u, y), maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"Gaussian fit did not converge: {exc}") from None
    a, c, w, off = popt
    if not np.all(np.isfinite(popt)) or a <= 0:
        raise FitError("Gaussian fit found no positive peak")
    return GaussianFit(float(a), float(c * scale + t0), float(abs(w) * scale), float(off))


def fit_dispersion(scan) -> float:
    """Delay (seconds) of the ``|-1,1>`` peak relative to the ``|0,0>`` peak.

    Parameters
    ----------
    scan : array_like, shape (n, 3)
        Rows of ``(delay_s, rate_00, rate_m11)``.
    """
    s = np.asarray(scan, dtype=float)
    if s.ndim != 2 or s.shape[1] != 3:
        raise ValueError("scan must have rows of (delay_s, rate_00, rate_m11)")
    even = fit_gaussian(s[:, 0], s[:, 1])
    odd = fit_gaussian(s[:, 0], s[:, 2])
    return odd.center - even.center


def synthetic_scan(delta: float, width: float = 0.5e-9, spacing: float = 156e-12,
                   span: tuple[float, float] | None = None, noise: float = 0.0,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Two Gaussian curves centred at 0 and ``delta`` with optional multiplicative noise."""
    lo, hi = span if span is not None else (min(0.0, delta) - 5 * width, max(0.0, delta) + 5 * width)
    t = np.arange(lo, hi + 0.5 * spacing, spacing)
    r00 = gaussian(t, 1.0, 0.0, width, 0.0)
    r11 = gaussian(t, 1.0, delta, width, 0.0)
    if noise > 0:
        rng = np.random.default_rng() if rng is None else rng
        r00 = r00 * (1 + noise * rng.standard_normal(t.size))
        r11 = r11 * (1 + noise * rng.standard_normal(t.size))
    return np.column_stack([t, r00, r11])


def read_delay_scan(path: str | Path) -> np.ndarray:
    """Read a CSV with header ``delay_s,rate_00,rate_m11``; '#' lines are comments."""
    rows = []
    header = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cells = [c.strip() for c in next(csv.reader([line]))]
            if header is None:
                header = cells
                missing = [c for c in SCAN_COLUMNS if c not in header]
                if missing:
                    raise TableFormatError(f"missing columns {missing}", lineno)
                idx = [header.index(c) for c in SCAN_COLUMNS]
                continue
            if len(cells) != len(header):
                raise TableFormatError(f"expected {len(header)} cells, found {len(cells)}", lineno)
            try:
                rows.append([float(cells[i]) for i in idx])
            except ValueError:
                raise TableFormatError("non-numeric value", lineno) from None
    if header is None:
        raise TableFormatError("empty delay scan")
    return np.array(rows, dtype=float).reshape(-1, 3)


def write_delay_scan(scan, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_COLUMNS)
        for row in np.asarray(scan, dtype=float):
            w.writerow([repr(float(v)) for v in row])
