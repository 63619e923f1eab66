"""Hourly candle ingestion, timestamp alignment and rolling cycle windows."""

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import (
    EmptyIntersection,
    MissingReference,
    OutOfRange,
    PanelTooShort,
    ParseError,
    UnknownSymbol,
)

logger = logging.getLogger(__name__)

HOUR = 3600
DEFAULT_REFERENCE = "BTCUSDT"
FORMATION_HOURS = 504
TRADING_HOURS = 168
STEP_HOURS = 168


def _frozen(arr, dtype):
    arr = np.array(arr, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PricePoint:
    timestamp: int
    close: float

    def __post_init__(self):
        if self.timestamp % HOUR:
            raise ValueError(f"timestamp {self.timestamp} is not hour-aligned")
        if not (math.isfinite(self.close) and self.close > 0):
            raise ValueError(f"close must be positive and finite, got {self.close}")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Close prices of one symbol on a strictly increasing hourly grid."""

    symbol: str
    timestamps: np.ndarray
    closes: np.ndarray

    def __post_init__(self):
        ts = _frozen(self.timestamps, np.int64)
        px = _frozen(self.closes, float)
        if ts.shape != px.shape or ts.ndim != 1:
            raise ValueError("timestamps and closes must be 1-d of equal length")
        if ts.size and (np.any(ts % HOUR) or np.any(np.diff(ts) <= 0)):
            raise ValueError(f"{self.symbol}: timestamps must be hour-aligned and strictly increasing")
        if not np.all(np.isfinite(px) & (px > 0)):
            raise ValueError(f"{self.symbol}: closes must be positive and finite")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "closes", px)

    def __len__(self):
        return self.timestamps.size

    @property
    def points(self):
        return [PricePoint(int(t), float(c)) for t, c in zip(self.timestamps, self.closes)]

    def take(self, mask):
        return PriceSeries(self.symbol, self.timestamps[mask], self.closes[mask])


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Reference series plus the other symbols on one shared timestamp grid.

    ``start`` is the first timestamp and ``end`` the exclusive upper bound
    (last timestamp plus one hour), so a panel covers ``[start, end)``.
    """

    reference: PriceSeries
    others: tuple
    dropped: dict = field(default_factory=dict)

    def __post_init__(self):
        others = tuple(sorted(self.others, key=lambda s: s.symbol))
        object.__setattr__(self, "others", others)
        if any(s.symbol == self.reference.symbol for s in others):
            raise ValueError("reference symbol must not appear among the other series")
        ts = self.reference.timestamps
        for s in others:
            if not np.array_equal(s.timestamps, ts):
                raise ValueError(f"{s.symbol} is not aligned with {self.reference.symbol}")
        if ts.size == 0:
            raise EmptyIntersection("panel has no rows")
        object.__setattr__(self, "_index", {s.symbol: s for s in (self.reference,) + others})

    @property
    def timestamps(self):
        return self.reference.timestamps

    @property
    def reference_symbol(self):
        return self.reference.symbol

    @property
    def symbols(self):
        """Reference first, then the others in sorted order."""
        return (self.reference.symbol,) + tuple(s.symbol for s in self.others)

    @property
    def other_symbols(self):
        return tuple(s.symbol for s in self.others)

    @property
    def start(self):
        return int(self.timestamps[0])

    @property
    def end(self):
        return int(self.timestamps[-1]) + HOUR

    def __len__(self):
        return self.timestamps.size

    def series(self, symbol):
        try:
            return self._index[symbol]
        except KeyError:
            raise UnknownSymbol(symbol) from None

    def close(self, symbol):
        return self.series(symbol).closes

    def closes_matrix(self, symbols=None):
        symbols = self.symbols if symbols is None else symbols
        return np.column_stack([self.close(s) for s in symbols])

    def slice(self, start, stop):
        return slice_panel(self, start, stop)


def _parse_file(path):
    """Rows of one candle file as ``{timestamp: close}``; the last duplicate wins."""
    path = Path(path)
    rows = {}
    duplicates = 0
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["timestamp", "close"]:
            raise ParseError(path, 1, "header must be 'timestamp,close'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(path, lineno, f"expected 2 fields, got {len(row)}")
            try:
                ts = int(row[0].strip())
            except ValueError:
                raise ParseError(path, lineno, f"timestamp {row[0]!r} is not an integer") from None
            try:
                close = float(row[1].strip())
            except ValueError:
                raise ParseError(path, lineno, f"close {row[1]!r} is not a number") from None
            if ts % HOUR:
                raise ParseError(path, lineno, f"timestamp {ts} is not hour-aligned")
            if not (math.isfinite(close) and close > 0):
                raise ParseError(path, lineno, f"close must be positive, got {row[1]!r}")
            if ts in rows:
                duplicates += 1
            rows[ts] = close
    if duplicates:
        msg = f"{path.name}: {duplicates} duplicate timestamps, keeping the last row"
        warnings.warn(msg, stacklevel=3)
        logger.warning(msg)
    return rows


def symbol_from_path(path):
    return Path(path).stem


def load_panel(paths, reference_symbol=DEFAULT_REFERENCE):
    """Read one ``<SYMBOL>.csv`` per symbol and align on common timestamps.

    Hours missing from any file are dropped from all series; nothing is
    interpolated. The number of rows dropped per symbol is kept in
    ``panel.dropped``. The result does not depend on the order of ``paths``.
    """
    parsed = {}
    for p in sorted(Path(x) for x in paths):
        sym = symbol_from_path(p)
        if sym in parsed:
            raise ValueError(f"symbol {sym} given twice")
        parsed[sym] = _parse_file(p)
    if reference_symbol not in parsed:
        raise MissingReference(f"reference symbol {reference_symbol} not among inputs")
    common = None
    for rows in parsed.values():
        keys = set(rows)
        common = keys if common is None else common & keys
    if not common:
        raise EmptyIntersection("input files share no timestamps")
    grid = np.array(sorted(common), dtype=np.int64)
    series = {}
    dropped = {}
    for sym, rows in parsed.items():
        series[sym] = PriceSeries(sym, grid, [rows[t] for t in grid.tolist()])
        dropped[sym] = len(rows) - grid.size
    if any(dropped.values()):
        logger.info("alignment dropped rows: %s", {k: v for k, v in dropped.items() if v})
    others = tuple(s for sym, s in series.items() if sym != reference_symbol)
    return PricePanel(series[reference_symbol], others, dropped)


def load_panel_dir(data_dir, reference_symbol=DEFAULT_REFERENCE, symbols=None):
    """Load every ``*.csv`` in ``data_dir`` (or only the given symbols)."""
    data_dir = Path(data_dir)
    if symbols is None:
        paths = sorted(data_dir.glob("*.csv"))
    else:
        paths = [data_dir / f"{s}.csv" for s in symbols]
        missing = [str(p) for p in paths if not p.exists()]
        if missing:
            raise UnknownSymbol(", ".join(missing))
    if not paths:
        raise EmptyIntersection(f"no candle files in {data_dir}")
    return load_panel(paths, reference_symbol)


def slice_panel(panel, start, stop):
    """Rows with ``start <= timestamp < stop``."""
    if not start < stop:
        raise OutOfRange(f"empty window [{start}, {stop})")
    if start < panel.start or stop > panel.end:
        raise OutOfRange(f"window [{start}, {stop}) outside panel [{panel.start}, {panel.end})")
    ts = panel.timestamps
    lo, hi = np.searchsorted(ts, [start, stop], side="left")
    if hi <= lo:
        raise OutOfRange(f"no rows in window [{start}, {stop})")
    sel = slice(lo, hi)
    return PricePanel(panel.reference.take(sel), tuple(s.take(sel) for s in panel.others))


@dataclass(frozen=True)
class Cycle:
    """One formation window followed by its trading window (epoch seconds, half-open)."""

    index: int
    formation_start: int
    formation_end: int
    trading_start: int
    trading_end: int

    def __iter__(self):
        return iter((self.formation_start, self.formation_end, self.trading_start, self.trading_end))


@dataclass(frozen=True)
class CycleSchedule:
    cycles: tuple
    formation_hours: int = FORMATION_HOURS
    trading_hours: int = TRADING_HOURS
    step_hours: int = STEP_HOURS

    def __len__(self):
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def __getitem__(self, i):
        return self.cycles[i]


def build_schedule(panel, formation_hours=FORMATION_HOURS, trading_hours=TRADING_HOURS, step_hours=STEP_HOURS):
    """All cycles that fit in the panel, the first starting at ``panel.start``.

    Windows are laid out in clock time: formation ``[s, s + F)``, trading
    ``[s + F, s + F + T)``, with ``s`` advancing by the step.
    """
    for name, val in (("formation_hours", formation_hours), ("trading_hours", trading_hours), ("step_hours", step_hours)):
        if int(val) != val or val <= 0:
            raise ValueError(f"{name} must be a positive integer, got {val}")
    span = (formation_hours + trading_hours) * HOUR
    if panel.end - panel.start < span:
        raise PanelTooShort(
            f"panel covers {(panel.end - panel.start) // HOUR} h, need {formation_hours + trading_hours} h"
        )
    n_cycles = (panel.end - panel.start - span) // (step_hours * HOUR) + 1
    cycles = []
    for k in range(n_cycles):
        fs = panel.start + k * step_hours * HOUR
        fe = fs + formation_hours * HOUR
        cycles.append(Cycle(k, fs, fe, fe, fe + trading_hours * HOUR))
    return CycleSchedule(tuple(cycles), formation_hours, trading_hours, step_hours)
