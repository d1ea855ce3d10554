"""Coincidence-count tables and their CSV representation.

File format: UTF-8 CSV with 9 data rows of 9 nonnegative integers
(row = Alice setting, column = Bob setting). An optional header row and/or
header column may name the settings. Lines starting with ``#`` are comments;
comments of the form ``# key: value`` are kept as table metadata. Recognised
keys are ``bob_frame`` (``direct`` or ``mirrored``), ``projector_convention``
(``main`` or ``table``) and ``acquisition_time_s``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import TableFormatError

BUNDLED_TABLE = "paper_table_s1.csv"


@dataclass(frozen=True, eq=False)
class CoincidenceTable:
    counts: np.ndarray
    acquisition_time_s: float | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (9, 9):
            raise ValueError(f"coincidence table must be 9x9, got {c.shape}")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValueError("coincidence counts must be finite and nonnegative")
        if np.any(c != np.round(c)):
            raise ValueError("coincidence counts must be integers")
        c = c.astype(np.int64)
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def bob_frame(self) -> str:
        return self.metadata.get("bob_frame", "direct")

    @property
    def projector_convention(self) -> str:
        return self.metadata.get("projector_convention", "main")

    def with_counts(self, counts) -> "CoincidenceTable":
        return CoincidenceTable(counts, self.acquisition_time_s, dict(self.metadata))


def _is_int(cell: str) -> bool:
    try:
        int(cell)
    except ValueError:
        return False
    return True


def parse_table(text: str) -> CoincidenceTable:
    metadata: dict[str, str] = {}
    rows: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if ":" in body:
                key, value = body.split(":", 1)
                key = key.strip()
                if key.isidentifier():
                    metadata[key] = value.strip()
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        rows.append((lineno, cells))

    if rows and not all(_is_int(c) for c in rows[0][1] if c):
        rows = rows[1:]  # header row
    elif len(rows) == 10 and [c for c in rows[0][1] if c] == [str(k) for k in range(9)]:
        rows = rows[1:]  # header row of bare canonical indices
    if len(rows) != 9:
        raise TableFormatError(f"expected 9 data rows, found {len(rows)}", rows[-1][0] if rows else None)

    data = []
    for lineno, cells in rows:
        if len(cells) == 10:
            cells = cells[1:]  # header column (labels or canonical indices)
        if len(cells) != 9:
            raise TableFormatError(f"expected 9 count columns, found {len(cells)}", lineno)
        values = []
        for cell in cells:
            if not _is_int(cell):
                raise TableFormatError(f"not an integer count: {cell!r}", lineno)
            v = int(cell)
            if v < 0:
                raise TableFormatError(f"negative count {v}", lineno)
            values.append(v)
        data.append(values)

    acq = metadata.get("acquisition_time_s")
    try:
        acq_f = float(acq) if acq is not None else None
    except ValueError:
        raise TableFormatError(f"acquisition_time_s is not a number: {acq!r}") from None
    frame = metadata.get("bob_frame", "direct")
    if frame not in ("direct", "mirrored"):
        raise TableFormatError(f"bob_frame must be 'direct' or 'mirrored', got {frame!r}")
    return CoincidenceTable(np.array(data), acq_f, metadata)


def read_table(path: str | Path) -> CoincidenceTable:
    return parse_table(Path(path).read_text(encoding="utf-8"))


def format_table(table: CoincidenceTable, labels: tuple[str, ...] | None = None) -> str:
    buf = io.StringIO()
    for key, value in sorted(table.metadata.items()):
        buf.write(f"# {key}: {value}\n")
    if table.acquisition_time_s is not None and "acquisition_time_s" not in table.metadata:
        buf.write(f"# acquisition_time_s: {table.acquisition_time_s!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    names = [str(i) for i in range(9)] if labels is None else list(labels)
    w.writerow(["setting", *names])
    for i, row in enumerate(table.counts):
        w.writerow([names[i], *(int(v) for v in row)])
    return buf.getvalue()


def write_table(table: CoincidenceTable, path: str | Path) -> None:
    Path(path).write_text(format_table(table), encoding="utf-8")


def load_bundled_table() -> CoincidenceTable:
    """The 81 published coincidence counts after 1 km of fibre."""
    text = resources.files("qutritlink.data").joinpath(BUNDLED_TABLE).read_text(encoding="utf-8")
    return parse_table(text)
