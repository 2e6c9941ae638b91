"""Delimited-text ingestion and demeaning for observed series."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParseError, TooShort

logger = logging.getLogger(__name__)

DELIMITERS = (",", ";", "\t")

POLICY_STRICT = "strict"
POLICY_DROP = "drop"


@dataclass
class SeriesFile:
    """A rectangular numeric series loaded from disk.

    Rows with missing or non-numeric cells are rejected (policy="strict")
    or dropped with a count (policy="drop"). A leading non-numeric column
    (dates) is detected and ignored with a notice.
    """

    path: str
    values: np.ndarray
    columns: list
    dropped_rows: int = 0
    notes: list = field(default_factory=list)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


def _detect_delimiter(line: str) -> str:
    counts = {d: line.count(d) for d in DELIMITERS}
    best = max(counts, key=counts.get)
    return best if counts[best] > 0 else ","


def _try_float(cell: str):
    cell = cell.strip()
    if cell == "":
        return None
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if np.isfinite(v) else None


def load_series(path: str, policy: str = POLICY_STRICT) -> SeriesFile:
    """Load a delimited numeric text file.

    The delimiter is auto-detected among comma, semicolon, and tab; a
    header row and a leading date-like column are detected and skipped.

    Raises
    ------
    ParseError
        Unparseable cell under policy="strict" (with its line number), or
        a ragged/empty file.
    """
    if policy not in (POLICY_STRICT, POLICY_DROP):
        raise ValueError(f"unknown policy {policy!r}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.readlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path!r}: {exc}") from exc

    lines = [(i + 1, ln.strip()) for i, ln in enumerate(raw_lines) if ln.strip()]
    if not lines:
        raise ParseError(f"{path!r} contains no data")

    delim = _detect_delimiter(lines[0][1])
    rows = [(lineno, [c for c in ln.split(delim)]) for lineno, ln in lines]
    width = len(rows[0][1])
    for lineno, cells in rows:
        if len(cells) != width:
            raise ParseError(f"expected {width} columns, found {len(cells)}", line=lineno)

    # header: first row with any non-numeric cell beyond what a date column explains
    first_vals = [_try_float(c) for c in rows[0][1]]
    has_header = any(v is None for v in first_vals)
    if has_header:
        columns = [c.strip() for c in rows[0][1]]
        body = rows[1:]
    else:
        columns = [f"y{k + 1}" for k in range(width)]
        body = rows
    if not body:
        raise ParseError(f"{path!r} has a header but no data rows")

    # leading date column: first cell non-numeric on every body row
    lead_nonnumeric = all(_try_float(cells[0]) is None for _, cells in body)
    col_offset = 0
    notes = []
    if lead_nonnumeric and width > 1:
        col_offset = 1
        columns = columns[1:]
        notes.append("ignored leading non-numeric column")
        logger.info("%s: ignoring leading non-numeric column", path)

    data = []
    dropped = 0
    for lineno, cells in body:
        vals = [_try_float(c) for c in cells[col_offset:]]
        if any(v is None for v in vals):
            if policy == POLICY_STRICT:
                bad = cells[col_offset + vals.index(None)].strip()
                raise ParseError(f"non-numeric value {bad!r}", line=lineno)
            dropped += 1
            continue
        data.append(vals)
    if not data:
        raise TooShort(f"{path!r} has no usable rows after dropping {dropped}")
    if dropped:
        logger.warning("%s: dropped %d rows with missing values", path, dropped)
        notes.append(f"dropped {dropped} rows")

    values = np.asarray(data, dtype=float)
    return SeriesFile(path=path, values=values, columns=columns,
                      dropped_rows=dropped, notes=notes)


def require_length(series: SeriesFile, min_per_dim: int = 20):
    """Enforce the estimation length floor T > min_per_dim * n."""
    if series.T <= min_per_dim * series.n:
        raise TooShort(
            f"{series.path!r}: T={series.T} rows is too short for n={series.n} "
            f"columns (need more than {min_per_dim * series.n})")


def demean(Y: np.ndarray) -> np.ndarray:
    """Subtract each column's sample mean. Idempotent up to rounding."""
    Y = np.asarray(Y, dtype=float)
    if Y.size == 0:
        raise ValueError("cannot demean an empty series")
    if Y.ndim == 1:
        return Y - Y.mean()
    return Y - Y.mean(axis=0)


def is_demeaned(Y: np.ndarray, tol: float = 1e-8) -> bool:
    """True when every column mean is negligible relative to its spread."""
    Y = np.asarray(Y, dtype=float)
    means = np.atleast_1d(Y.mean(axis=0))
    scale = np.maximum(np.atleast_1d(Y.std(axis=0)), 1e-12)
    return bool(np.all(np.abs(means) <= tol * np.maximum(1.0, scale)))
