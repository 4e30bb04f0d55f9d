"""Right-censored survival data, cut grids, and per-bin sufficient statistics.

Bins are left-open, right-closed: an observation whose time equals a cut
belongs to the bin ending at that cut.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "SurvivalData",
    "CutGrid",
    "SufficientStats",
    "parse_survival_text",
    "read_survival_file",
    "make_cut_grid",
    "sufficient_stats",
]

_MISSING_TOKENS = {"", "na", "nan", "null", "none", "."}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SurvivalData:
    """Observed follow-up times and event indicators (1 = event, 0 = censored)."""

    time: np.ndarray
    status: np.ndarray

    def __post_init__(self):
        time = _readonly(np.asarray(self.time, dtype=float))
        status = _readonly(np.asarray(self.status, dtype=np.int64))
        if time.ndim != 1 or status.ndim != 1 or time.shape != status.shape:
            raise ValueError("time and status must be 1-d arrays of equal length")
        if time.size < 1:
            raise ValueError("no observations")
        if not np.all(np.isfinite(time)) or np.any(time <= 0.0):
            raise ValueError("times must be positive and finite")
        if not np.isin(status, (0, 1)).all():
            raise ValueError("status must be 0 or 1")
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "status", status)

    @property
    def n(self) -> int:
        return self.time.size

    @property
    def n_events(self) -> int:
        return int(self.status.sum())

    @property
    def max_time(self) -> float:
        return float(self.time.max())

    def subset(self, indices: np.ndarray) -> "SurvivalData":
        """Rows at `indices`, duplicates allowed (bootstrap resampling)."""
        idx = np.asarray(indices, dtype=np.intp)
        return SurvivalData(self.time[idx], self.status[idx])


@dataclass(frozen=True)
class CutGrid:
    """Ordered finite cut points; implicit boundaries 0 below and +inf above.

    `cuts` may be empty, which leaves the single bin (0, inf).
    """

    cuts: np.ndarray

    def __post_init__(self):
        cuts = _readonly(np.asarray(self.cuts, dtype=float).reshape(-1))
        if cuts.size and (np.any(cuts <= 0.0) or not np.all(np.isfinite(cuts))):
            raise ValueError("cuts must be positive and finite")
        if cuts.size > 1 and np.any(np.diff(cuts) <= 0.0):
            raise ValueError("cuts must be strictly increasing")
        object.__setattr__(self, "cuts", cuts)

    @property
    def n_bins(self) -> int:
        return self.cuts.size + 1

    def bin_index(self, t) -> np.ndarray:
        """Index of the bin (c_{l-1}, c_l] containing each time."""
        return np.searchsorted(self.cuts, np.asarray(t, dtype=float), side="left")


@dataclass(frozen=True)
class SufficientStats:
    """Per-bin event counts and at-risk exposure time; all the likelihood needs."""

    events: np.ndarray
    exposure: np.ndarray
    n: int

    def __post_init__(self):
        events = _readonly(np.asarray(self.events, dtype=np.int64))
        exposure = _readonly(np.asarray(self.exposure, dtype=float))
        if events.shape != exposure.shape or events.ndim != 1:
            raise ValueError("events and exposure must be 1-d arrays of equal length")
        if np.any(events < 0) or np.any(exposure < 0.0):
            raise ValueError("negative counts or exposure")
        if np.any((events > 0) & (exposure == 0.0)):
            raise ValueError("bin with events but no exposure")
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "exposure", exposure)

    @property
    def n_bins(self) -> int:
        return self.events.size


def _parse_value(raw: str, column: str, row: int, kind: str) -> float:
    token = raw.strip()
    if token.lower() in _MISSING_TOKENS:
        raise ValueError(f"missing {kind} value at row {row}")
    try:
        return float(token)
    except ValueError:
        raise ValueError(f"non-numeric {kind} {token!r} at row {row}") from None


def parse_survival_text(
    text: str,
    time_column: str = "time",
    status_column: str = "status",
    delimiter: str | None = None,
) -> SurvivalData:
    """Parse delimited text with a header row into a SurvivalData.

    The delimiter is comma by default; a tab in the header line switches to
    tab. Lines starting with '#' are metadata/comments and are skipped, so
    files emitted by the CLI can be read back. Row indices in error messages
    are 1-based data rows.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("no observations")
    if delimiter is None:
        delimiter = "\t" if "\t" in lines[0] else ","
    reader = csv.DictReader(io.StringIO("\n".join(lines)), delimiter=delimiter)
    fields = reader.fieldnames or []
    for col in (time_column, status_column):
        if col not in fields:
            raise ValueError(f"missing column {col!r} (found {fields})")
    times, statuses = [], []
    for row_idx, record in enumerate(reader, start=1):
        t = _parse_value(record.get(time_column) or "", time_column, row_idx, "time")
        s = _parse_value(record.get(status_column) or "", status_column, row_idx, "status")
        if not math.isfinite(t) or t <= 0.0:
            raise ValueError(f"non-positive time at row {row_idx}")
        if s not in (0.0, 1.0):
            raise ValueError(f"invalid status {s!r} at row {row_idx}")
        times.append(t)
        statuses.append(int(s))
    if not times:
        raise ValueError("no observations")
    return SurvivalData(np.array(times), np.array(statuses))


def read_survival_file(
    path,
    time_column: str = "time",
    status_column: str = "status",
    delimiter: str | None = None,
) -> SurvivalData:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_survival_text(fh.read(), time_column, status_column, delimiter)


def make_cut_grid(
    cuts: Sequence[float] | None = None,
    *,
    start: float | None = None,
    end: float | None = None,
    step: float | None = None,
) -> CutGrid:
    """Build a cut grid from an explicit list or an arithmetic range.

    The range form generates start, start+step, ... strictly below `end`,
    so {1, 100, 1} gives the 99 cuts 1..99 and {1, 4800, 10} ends at 4791.
    """
    if cuts is not None:
        if start is not None or end is not None or step is not None:
            raise ValueError("give either an explicit cut list or a range, not both")
        values = np.asarray(list(cuts), dtype=float)
        if values.size == 0:
            raise ValueError("empty cut list")
        return CutGrid(values)
    if start is None or end is None or step is None:
        raise ValueError("range form needs start, end and step")
    if step <= 0.0:
        raise ValueError("step must be positive")
    if not 0.0 < start < end:
        raise ValueError("need 0 < start < end")
    count = int(math.floor((end - start) / step * (1.0 + 1e-12))) + 1
    values = start + step * np.arange(count)
    values = values[values < end]
    return CutGrid(values)


def sufficient_stats(data: SurvivalData, grid: CutGrid) -> SufficientStats:
    """Reduce a dataset to per-bin event counts and exposure times.

    Exposure uses exact (Shewchuk) summation of min(T_i, c_l) at each
    boundary, so totals are independent of observation order and bin
    refinements aggregate exactly.
    """
    L = grid.n_bins
    events = np.bincount(
        grid.bin_index(data.time[data.status == 1]), minlength=L
    ).astype(np.int64)
    boundary_sums = np.empty(L + 1)
    boundary_sums[0] = 0.0
    for l, cut in enumerate(grid.cuts, start=1):
        boundary_sums[l] = math.fsum(np.minimum(data.time, cut).tolist())
    boundary_sums[L] = math.fsum(data.time.tolist())
    exposure = np.diff(boundary_sums)
    # guard against -0.0 / tiny negatives from the boundary differences
    exposure[exposure < 0.0] = 0.0
    return SufficientStats(events, exposure, data.n)
