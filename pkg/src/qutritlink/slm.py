"""Phase-only SLM holograms that encode both amplitude and phase of an OAM field.

For a target field ``A exp(i phi)`` with ``0 <= A <= 1`` each pixel gets

    Psi = L * Mod(F + 2 pi x / period, 2 pi)
    L   = 1 + sinc^{-1}(A) / pi,   F = phi * pi * L

with ``sinc(x) = sin(x) / x`` inverted on the branch ``[-pi, 0]`` (so ``L`` runs
from 0 at ``A = 0`` to 1 at ``A = 1``). ``x`` is the 0-based pixel column and
``period`` the blazed-grating period in pixels. A documented alternative
carrier ``F = phi - pi * L`` is available through ``carrier="shifted"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TWO_PI = 2 * np.pi
BISECTION_STEPS = 60
CARRIERS = ("product", "shifted")


@dataclass(frozen=True)
class Grid:
    """Pixel grid; pixel ``(nx // 2, ny // 2)`` sits on the optical axis."""

    nx: int = 512
    ny: int = 512
    pitch: float = 8e-6

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or not self.pitch > 0:
            raise ValueError("grid needs positive dimensions and pitch")

    @property
    def center(self) -> tuple[int, int]:
        """(row, column) of the axis pixel."""
        return self.ny // 2, self.nx // 2

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical ``(x, y)`` arrays of shape ``(ny, nx)`` in metres."""
        x = (np.arange(self.nx) - self.nx // 2) * self.pitch
        y = (np.arange(self.ny) - self.ny // 2) * self.pitch
        return np.meshgrid(x, y, indexing="xy")

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.coordinates()
        return np.hypot(x, y), np.arctan2(y, x)


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Sampled target field: amplitude in [0, 1] and phase in radians."""

    amplitude: np.ndarray
    phase: np.ndarray
    pitch: float = 8e-6

    def __post_init__(self):
        a = np.array(self.amplitude, dtype=float)
        ph = np.array(self.phase, dtype=float)
        if a.shape != ph.shape or a.ndim != 2:
            raise ValueError("amplitude and phase must be 2-D arrays of equal shape")
        if not np.all(np.isfinite(a)) or a.min() < 0 or a.max() > 1:
            raise ValueError("amplitude must lie in [0, 1]")
        for arr, name in ((a, "amplitude"), (ph, "phase")):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.amplitude.shape

    @classmethod
    def from_complex(cls, field: np.ndarray, pitch: float = 8e-6) -> "FieldSample":
        """Normalize ``|field|`` by its maximum; phase wrapped to [0, 2 pi)."""
        mag = np.abs(field)
        peak = mag.max()
        amp = mag / peak if peak > 0 else mag
        return cls(np.clip(amp, 0.0, 1.0), _wrap(np.angle(field)), pitch)


@dataclass(frozen=True, eq=False)
class Hologram:
    """Phase pattern ``Psi`` in [0, 2 pi) and its grating period (pixels)."""

    phase: np.ndarray
    period: float

    def __post_init__(self):
        p = np.array(self.phase, dtype=float)
        if p.ndim != 2:
            raise ValueError("hologram phase must be 2-D")
        if not (np.all(p >= 0) and np.all(p < TWO_PI)):
            raise ValueError("hologram phase must lie in [0, 2 pi)")
        p.flags.writeable = False
        object.__setattr__(self, "phase", p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.phase.shape

    def gray_levels(self) -> np.ndarray:
        """8-bit levels ``floor(Psi / 2 pi * 255 + 0.5)`` (round half up)."""
        return np.floor(self.phase / TWO_PI * 255 + 0.5).astype(np.uint8)


def _wrap(phase: np.ndarray) -> np.ndarray:
    """Map to [0, 2 pi) exactly (``np.mod`` can return 2 pi for tiny negatives)."""
    w = np.mod(phase, TWO_PI)
    w[w >= TWO_PI] = 0.0
    return w


def lg_complex(ell: int, w0: float, grid: Grid, p: int = 0) -> np.ndarray:
    """Power-normalized LG_{p=0}^{ell} field at the waist, sampled on ``grid``."""
    if p != 0:
        raise ValueError("only radial index p = 0 is supported")
    if not w0 > 0:
        raise ValueError("beam waist must be positive")
    r, theta = grid.polar()
    norm = np.sqrt(2.0 / (np.pi * math.factorial(abs(ell)))) / w0
    radial = (np.sqrt(2.0) * r / w0) ** abs(ell) * np.exp(-((r / w0) ** 2))
    return norm * radial * np.exp(1j * ell * theta)


def lg_field(ell: int, p: int, w0: float, grid: Grid) -> FieldSample:
    """LG amplitude (max-normalized) and phase ``ell * theta`` wrapped to [0, 2 pi)."""
    f = lg_complex(ell, w0, grid, p)
    mag = np.abs(f)
    _, theta = grid.polar()
    phase = _wrap(ell * theta) if ell != 0 else np.zeros_like(theta)
    return FieldSample(mag / mag.max(), phase, grid.pitch)


def superposition_field(coefficients: dict[int, complex], w0: float, grid: Grid) -> FieldSample:
    """Field of ``sum_l c_l LG_l`` (power-normalized modes), amplitude max-normalized."""
    if not coefficients:
        raise ValueError("need at least one mode")
    total = sum(c * lg_complex(ell, w0, grid) for ell, c in coefficients.items())
    return FieldSample.from_complex(total, grid.pitch)


def sinc(x):
    """``sin(x) / x`` with ``sinc(0) = 1``."""
    x = np.asarray(x, dtype=float)
    return np.sinc(x / np.pi)


def sinc_inverse(a) -> np.ndarray:
    """``x`` in ``[-pi, 0]`` with ``sinc(x) = a`` for ``a`` in [0, 1], by bisection.

    The endpoints are exact: ``a = 0`` maps to ``-pi`` and ``a = 1`` to 0.
    """
    a = np.asarray(a, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
        raise ValueError("amplitude must lie in [0, 1]")
    lo = np.full(a.shape, -np.pi)
    hi = np.zeros(a.shape)
    # sinc increases monotonically from 0 at -pi to 1 at 0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = sinc(mid) < a
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    x = np.where(a == 0, -np.pi, x)
    x = np.where(a == 1, 0.0, x)
    return x


def envelope(a) -> np.ndarray:
    """Grating-depth factor ``L = 1 + sinc^{-1}(A) / pi`` in [0, 1]."""
    return 1.0 + sinc_inverse(a) / np.pi


def build_hologram(f: FieldSample, period: float = 8, carrier: str = "product") -> Hologram:
    """Amplitude-and-phase encoding hologram of ``f`` on a blazed grating.

    Parameters
    ----------
    f : FieldSample
    period : float
        Grating period in pixels (>= 2), along the column axis.
    carrier : {"product", "shifted"}
        ``F = phi * pi * L`` (default) or ``F = phi - pi * L``.
    """
    if not period >= 2:
        raise ValueError("grating period must be at least 2 pixels")
    if carrier not in CARRIERS:
        raise ValueError(f"carrier must be one of {CARRIERS}")
    big_l = envelope(f.amplitude)
    big_f = f.phase * np.pi * big_l if carrier == "product" else f.phase - np.pi * big_l
    x = np.arange(f.shape[1])[None, :]
    psi = big_l * _wrap(big_f + TWO_PI * x / period)
    psi[psi >= TWO_PI] = 0.0
    return Hologram(psi, period)


def phase_flatten_mask(ell: int, grid: Grid, period: float = 8, carrier: str = "product") -> Hologram:
    """Analysis mask: unit amplitude, conjugate vortex phase ``-ell * theta``.

    With the default ``"product"`` carrier the encoded phase is ``pi`` times
    the field phase, so only ``carrier="shifted"`` reproduces a winding of
    exactly ``-ell``.
    """
    if abs(ell) > 2:
        raise ValueError("phase-flattening masks are provided for |l| <= 2")
    _, theta = grid.polar()
    phase = _wrap(-ell * theta) if ell != 0 else np.zeros_like(theta)
    return build_hologram(FieldSample(np.ones_like(theta), phase, grid.pitch), period, carrier)


def superposition_mask(coefficients: dict[int, complex], w0: float, grid: Grid, period: float = 8,
                       carrier: str = "product") -> Hologram:
    """Analysis mask for a mode superposition: the conjugate of its field."""
    f = superposition_field(coefficients, w0, grid)
    conj = FieldSample(f.amplitude, _wrap(-f.phase), f.pitch)
    return build_hologram(conj, period, carrier)


def winding_number(phase: np.ndarray, radius: float, center: tuple[int, int] | None = None,
                   samples: int = 512) -> int:
    """Net 2 pi windings of ``phase`` around a pixel circle (counter-clockwise in ``theta``)."""
    ph = np.asarray(phase, dtype=float)
    cy, cx = (ph.shape[0] // 2, ph.shape[1] // 2) if center is None else center
    t = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    rows = np.rint(cy + radius * np.sin(t)).astype(int)
    cols = np.rint(cx + radius * np.cos(t)).astype(int)
    if rows.min() < 0 or cols.min() < 0 or rows.max() >= ph.shape[0] or cols.max() >= ph.shape[1]:
        raise ValueError("winding loop leaves the grid")
    vals = ph[rows, cols]
    steps = np.diff(np.append(vals, vals[0]))
    steps = (steps + np.pi) % TWO_PI - np.pi
    return int(np.rint(steps.sum() / TWO_PI))


def write_pgm(h: Hologram, path: str | Path) -> None:
    """Binary 8-bit PGM (P5), rows top to bottom."""
    levels = h.gray_levels()
    ny, nx = levels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(levels.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM file")
    nx, ny, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only 8-bit PGM files are supported")
    return np.frombuffer(parts[4][: nx * ny], dtype=np.uint8).reshape(ny, nx)


def write_phase_csv(h: Hologram, path: str | Path) -> None:
    """Raw radian values, one pixel row per line, ``%.17g`` (round-trips exactly)."""
    np.savetxt(path, h.phase, delimiter=",", fmt="%.17g")
