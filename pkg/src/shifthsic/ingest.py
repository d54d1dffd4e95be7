"""Real-data pipeline: tick CSV loading, granulation, differencing, alignment."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyInput, InvalidInput, NoOverlap, OrderError, ParseError, TooShort
from .statistic import SeriesPair

CARRY_FORWARD = "carry_forward"
DROP = "drop"
GAP_POLICIES = (CARRY_FORWARD, DROP)


@dataclass
class TickSeries:
    timestamps: np.ndarray
    prices: np.ndarray
    name: str = "series"

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.prices = np.asarray(self.prices, dtype=float)
        if self.timestamps.shape != self.prices.shape:
            raise InvalidInput("timestamps and prices differ in length")
        if np.any(np.diff(self.timestamps) <= 0):
            raise OrderError(f"{self.name}: timestamps are not strictly increasing")
        if not np.all(np.isfinite(self.prices)):
            raise InvalidInput(f"{self.name}: non-finite price")


@dataclass
class RegularSeries:
    """Values on the grid start + k * interval. NaN marks a dropped slot."""

    start: int
    interval: int
    values: np.ndarray
    name: str = "series"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.interval <= 0:
            raise InvalidInput("interval must be positive")
        self.values = np.asarray(self.values, dtype=float)

    @property
    def timestamps(self):
        return self.start + self.interval * np.arange(self.values.size, dtype=np.int64)

    @property
    def end(self):
        """Timestamp of the last slot."""
        return self.start + self.interval * (self.values.size - 1)


def _read_rows(path):
    path = Path(path)
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            yield lineno, [c.strip() for c in row]


def load_table(path, columns, with_lines=False):
    """Parse a numeric CSV with a leading integer timestamp column.

    A first row that does not parse is treated as a header. Returns
    (timestamps, values) with values of shape (rows, columns - 1), plus the
    source line numbers when ``with_lines`` is set.
    """
    stamps, values, lines = [], [], []
    first = True
    for lineno, row in _read_rows(path):
        try:
            if len(row) != columns:
                raise ValueError(f"expected {columns} columns, got {len(row)}")
            ts = int(row[0])
            vals = [float(c) for c in row[1:]]
        except ValueError as exc:
            if first:
                first = False
                continue
            raise ParseError(f"unparsable row {','.join(row)!r} ({exc})", lineno) from None
        first = False
        stamps.append(ts)
        values.append(vals)
        lines.append(lineno)
    out = np.asarray(stamps, dtype=np.int64), np.asarray(values, dtype=float).reshape(-1, columns - 1)
    return out + (lines,) if with_lines else out


def load_csv(path, name=None):
    """Load ``timestamp_ms,price`` ticks into a validated TickSeries."""
    name = name or Path(path).stem
    stamps, values, lines = load_table(path, 2, with_lines=True)
    prices = values[:, 0]
    bad = np.flatnonzero(~(np.isfinite(prices) & (prices > 0)))
    if bad.size:
        raise ParseError(f"price must be positive and finite, got {prices[bad[0]]}", lines[bad[0]])
    dup = np.flatnonzero(np.diff(stamps) <= 0)
    if dup.size:
        raise OrderError(f"{name}: timestamp {stamps[dup[0] + 1]} on line {lines[dup[0] + 1]} does not increase")
    return TickSeries(stamps, prices, name)


def granulate(ticks, interval, gap_policy=CARRY_FORWARD):
    """Last tick price in each window [start + k*interval, start + (k+1)*interval).

    Windows are aligned to multiples of ``interval``. Empty windows repeat
    the previous value (carry_forward) or become NaN (drop) and are removed
    later by :func:`align`.
    """
    if interval <= 0:
        raise InvalidInput("interval must be positive")
    if gap_policy not in GAP_POLICIES:
        raise InvalidInput(f"unknown gap policy {gap_policy!r}")
    if ticks.timestamps.size == 0:
        raise EmptyInput(f"{ticks.name}: no ticks")
    slot = ticks.timestamps // interval
    start_slot = slot[0]
    k = slot - start_slot
    values = np.full(int(k[-1]) + 1, np.nan)
    # timestamps increase, so the last assignment per slot wins
    values[k] = ticks.prices
    if gap_policy == CARRY_FORWARD:
        filled = np.flatnonzero(~np.isnan(values))
        values = values[filled[np.searchsorted(filled, np.arange(values.size), side="right") - 1]]
    meta = {"gap_policy": gap_policy, "source": "granulate"}
    return RegularSeries(int(start_slot * interval), int(interval), values, ticks.name, meta)


def difference(series):
    """values[t + 1] - values[t]; the result starts one slot later."""
    if series.values.size < 2:
        raise TooShort(f"{series.name}: need at least two values to difference")
    meta = dict(series.meta, differenced=True)
    return RegularSeries(series.start + series.interval, series.interval, np.diff(series.values), series.name, meta)


def _overlap(a, b):
    if a.interval != b.interval:
        raise InvalidInput(f"interval mismatch: {a.interval} vs {b.interval}")
    if (a.start - b.start) % a.interval:
        raise InvalidInput("grids are offset from each other")
    lo = max(a.start, b.start)
    hi = min(a.end, b.end)
    if hi < lo:
        raise NoOverlap(f"{a.name} and {b.name} do not overlap in time")
    ia = slice((lo - a.start) // a.interval, (hi - a.start) // a.interval + 1)
    ib = slice((lo - b.start) // b.interval, (hi - b.start) // b.interval + 1)
    return lo, a.values[ia], b.values[ib]


def align(a, b):
    """Intersect two regular series and drop slots missing on either side."""
    lo, va, vb = _overlap(a, b)
    stamps = lo + a.interval * np.arange(va.size, dtype=np.int64)
    keep = ~(np.isnan(va) | np.isnan(vb))
    if not keep.any():
        raise NoOverlap(f"{a.name} and {b.name} share no populated slots")
    return SeriesPair(va[keep], vb[keep], (a.name, b.name), stamps[keep])


def product(a, b, name=None):
    """Slotwise product of two rate series (e.g. AUD/CAD x CAD/JPY), NaN where either is missing."""
    lo, va, vb = _overlap(a, b)
    meta = {"gap_policy": a.meta.get("gap_policy"), "source": "product"}
    return RegularSeries(lo, a.interval, va * vb, name or f"{a.name}*{b.name}", meta)


def write_pair_csv(path, pair):
    """Write ``timestamp_ms,x,y`` with 17 significant digits."""
    stamps = pair.timestamps if pair.timestamps is not None else np.arange(pair.n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp_ms", "x", "y"])
        for t, x, y in zip(stamps, pair.x, pair.y):
            w.writerow([int(t), f"{x:.17g}", f"{y:.17g}"])


def write_series_csv(path, series):
    """Write a RegularSeries as ``timestamp_ms,value``; dropped slots are skipped."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp_ms", "value"])
        for t, v in zip(series.timestamps, series.values):
            if not np.isnan(v):
                w.writerow([int(t), f"{v:.17g}"])


def load_pair_csv(path):
    """Read ``timestamp_ms,x,y`` back into a SeriesPair."""
    stamps, values = load_table(path, 3)
    if stamps.size == 0:
        raise EmptyInput(f"{path}: no rows")
    return SeriesPair(values[:, 0], values[:, 1], ("x", "y"), stamps)


def load_values_csv(path):
    """Read ``timestamp_ms,value`` (values may be negative) as (timestamps, values)."""
    stamps, values = load_table(path, 2)
    if stamps.size == 0:
        raise EmptyInput(f"{path}: no rows")
    return stamps, values[:, 0]


def join_values(x, y, labels=("x", "y")):
    """Inner-join two (timestamps, values) tables on timestamp."""
    common, ix, iy = np.intersect1d(x[0], y[0], assume_unique=True, return_indices=True)
    if common.size == 0:
        raise NoOverlap("the two inputs share no timestamps")
    return SeriesPair(x[1][ix], y[1][iy], labels, common)
