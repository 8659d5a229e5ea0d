"""Trade-by-trade loading, session filtering and binning into flow series.

Input CSV files have the header ``timestamp,side,volume,price``. Timestamps
are ISO-8601 strings or integer nanoseconds since the epoch; either way they
are read as local exchange wall-clock time (no time-zone conversion).
"""
from __future__ import annotations

import csv
import datetime as dt
import glob as _glob
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TradeRecord",
    "TradeLog",
    "FlowBins",
    "IngestError",
    "EmptyFileError",
    "TradeParseError",
    "AlignmentError",
    "parse_session",
    "load_trades",
    "load_many",
    "bin_flows",
    "stream_to_trades",
]

HEADER = ["timestamp", "side", "volume", "price"]
MAX_BAD_FRACTION = 0.001
_SIDES = {"1": 1, "+1": 1, "b": 1, "buy": 1, "-1": -1, "s": -1, "sell": -1}
_NS_PER_DAY = 86_400 * 10 ** 9


class IngestError(ValueError):
    pass


class EmptyFileError(IngestError):
    pass


class TradeParseError(IngestError):
    pass


class AlignmentError(IngestError):
    pass


@dataclass(frozen=True)
class TradeRecord:
    """One trade; ``timestamp`` is seconds since local midnight of ``date``."""

    date: dt.date
    timestamp: float
    side: int
    volume: float
    price: float


@dataclass
class TradeLog:
    """Session-filtered, time-sorted trades with loading diagnostics."""

    records: list = field(default_factory=list)
    malformed: int = 0
    filtered: int = 0
    total_rows: int = 0

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def parse_session(spec) -> tuple:
    """'09:30-16:00' (or a pair of 'HH:MM[:SS]' strings) to seconds since midnight."""
    if isinstance(spec, str):
        parts = spec.split("-")
        if len(parts) != 2:
            raise ValueError(f"session must look like 09:30-16:00, got {spec!r}")
    else:
        parts = list(spec)
    out = []
    for p in parts:
        if isinstance(p, (int, float)):
            out.append(float(p))
            continue
        t = dt.time.fromisoformat(p.strip())
        out.append(t.hour * 3600 + t.minute * 60 + t.second + t.microsecond * 1e-6)
    if not out[0] < out[1]:
        raise ValueError("session open must precede close")
    return out[0], out[1]


def _parse_timestamp(raw: str):
    raw = raw.strip()
    if raw.isdigit():
        ns = int(raw)
        day, rem = divmod(ns, _NS_PER_DAY)
        return dt.date(1970, 1, 1) + dt.timedelta(days=day), rem / 1e9
    stamp = dt.datetime.fromisoformat(raw.replace("Z", "+00:00"))
    secs = stamp.hour * 3600 + stamp.minute * 60 + stamp.second + stamp.microsecond * 1e-6
    return stamp.date(), secs


def _parse_row(row):
    if len(row) != 4:
        raise ValueError("wrong field count")
    date, secs = _parse_timestamp(row[0])
    side = _SIDES.get(row[1].strip().lower())
    if side is None:
        raise ValueError(f"bad side {row[1]!r}")
    volume = float(row[2])
    price = float(row[3])
    if not volume > 0 or not price > 0 or not np.isfinite(volume) or not np.isfinite(price):
        raise ValueError("volume and price must be positive")
    return TradeRecord(date, secs, side, volume, price)


def load_trades(path, session=("09:30", "16:00"),
                max_bad_fraction: float = MAX_BAD_FRACTION) -> TradeLog:
    """Parse one CSV file and keep trades with open <= time < close."""
    open_s, close_s = parse_session(session)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFileError(f"{path}: empty file")
        if [h.strip().lower() for h in header] != HEADER:
            raise TradeParseError(f"{path}: expected header {','.join(HEADER)}")
        log = TradeLog()
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            log.total_rows += 1
            try:
                rec = _parse_row(row)
            except (ValueError, TypeError):
                log.malformed += 1
                continue
            if open_s <= rec.timestamp < close_s:
                log.records.append(rec)
            else:
                log.filtered += 1
    if log.total_rows == 0:
        raise EmptyFileError(f"{path}: no data rows")
    if log.malformed > max_bad_fraction * log.total_rows:
        raise TradeParseError(
            f"{path}: {log.malformed} of {log.total_rows} rows malformed "
            f"(threshold {max_bad_fraction:.2%})")
    log.records.sort(key=lambda r: (r.date, r.timestamp))
    return log


def load_many(pattern, session=("09:30", "16:00")) -> TradeLog:
    """Load every file matching a glob and merge by (date, timestamp)."""
    paths = sorted(_glob.glob(pattern)) if isinstance(pattern, str) else list(pattern)
    if not paths:
        raise EmptyFileError(f"no files match {pattern!r}")
    merged = TradeLog()
    for p in paths:
        log = load_trades(p, session)
        merged.records.extend(log.records)
        merged.malformed += log.malformed
        merged.filtered += log.filtered
        merged.total_rows += log.total_rows
    merged.records.sort(key=lambda r: (r.date, r.timestamp))
    return merged


@dataclass
class FlowBins:
    """Per-day binned flows, arrays of shape (days, bins)."""

    dates: list
    edges: np.ndarray
    signed: np.ndarray
    unsigned: np.ndarray

    @property
    def cum_signed(self):
        return np.cumsum(self.signed, axis=1)

    @property
    def cum_unsigned(self):
        return np.cumsum(self.unsigned, axis=1)

    def to_csv(self, path):
        cs, cu = self.cum_signed, self.cum_unsigned
        with open(path, "w") as fh:
            fh.write("date,bin_start,signed,unsigned,cum_signed,cum_unsigned\n")
            for d, date in enumerate(self.dates):
                for b in range(self.signed.shape[1]):
                    fh.write(f"{date},{self.edges[b]:.6f},{self.signed[d, b]:.10g},"
                             f"{self.unsigned[d, b]:.10g},{cs[d, b]:.10g},{cu[d, b]:.10g}\n")


def bin_flows(records, delta: float, session=("09:30", "16:00")) -> FlowBins:
    """Sum signed (side * volume) and unsigned volume over bins of ``delta`` seconds."""
    open_s, close_s = parse_session(session)
    length = close_s - open_s
    n_bins = length / delta if delta > 0 else 0
    if not delta > 0 or abs(n_bins - round(n_bins)) > 1e-9 or round(n_bins) < 1:
        raise AlignmentError(f"bin width {delta} does not divide the session length {length}")
    n_bins = int(round(n_bins))
    records = list(records)
    dates = sorted({r.date for r in records})
    row = {d: i for i, d in enumerate(dates)}
    signed = np.zeros((len(dates), n_bins))
    unsigned = np.zeros((len(dates), n_bins))
    if records:
        d_idx = np.array([row[r.date] for r in records])
        ts = np.array([r.timestamp for r in records])
        if np.any(ts < open_s) or np.any(ts >= close_s):
            raise AlignmentError("records fall outside the session")
        b_idx = np.minimum(((ts - open_s) // delta).astype(int), n_bins - 1)
        vol = np.array([r.volume for r in records])
        side = np.array([r.side for r in records])
        np.add.at(signed, (d_idx, b_idx), side * vol)
        np.add.at(unsigned, (d_idx, b_idx), vol)
    edges = open_s + delta * np.arange(n_bins + 1)
    return FlowBins(dates, edges, signed, unsigned)


def stream_to_trades(stream, session=("09:30", "16:00"), date=dt.date(1970, 1, 1),
                     time_unit: float | None = None, price: float = 1.0) -> list:
    """Unit-volume TradeRecords for a simulated EventStream.

    Stream time [0, T] is mapped linearly onto the session (or scaled by
    ``time_unit`` seconds per model time unit).
    """
    open_s, close_s = parse_session(session)
    unit = (close_s - open_s) / stream.T if time_unit is None else float(time_unit)
    ts = open_s + stream.times * unit
    ts = np.minimum(ts, np.nextafter(close_s, open_s))
    return [TradeRecord(date, float(t), int(s), 1.0, price)
            for t, s in zip(ts, stream.signs())]
