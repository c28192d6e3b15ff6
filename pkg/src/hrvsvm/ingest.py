"""Readers and writers for RR-interval files, heart-rate CSVs and session manifests."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DomainError,
    DuplicateIdError,
    EmptySeriesError,
    FormatError,
    HeaderError,
    MonotonicityError,
    RangeError,
)

HR_HEADER = ("t_ms", "hr_bpm")
MANIFEST_HEADER = (
    "session_id",
    "signal_path",
    "signal_kind",
    "stress_level",
    "flu_level",
    "sleep_hours",
    "temperature_c",
    "systole",
    "diastole",
)
SIGNAL_KINDS = ("rr", "hr")
LEVEL_RANGE = (1, 10)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RrSeries:
    """Inter-beat intervals in ms. ``filtered`` marks output of the ectopic filter."""

    intervals: np.ndarray
    start_offset_ms: float = 0.0
    filtered: bool = False

    def __post_init__(self):
        arr = _frozen(self.intervals)
        if arr.ndim != 1:
            raise ValueError("intervals must be one-dimensional")
        if arr.size and not np.all(np.isfinite(arr)):
            raise DomainError("intervals must be finite")
        if np.any(arr <= 0):
            raise DomainError("intervals must be > 0 ms")
        object.__setattr__(self, "intervals", arr)
        object.__setattr__(self, "start_offset_ms", float(self.start_offset_ms))

    def __len__(self):
        return self.intervals.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RrSeries):
            return NotImplemented
        return (
            np.array_equal(self.intervals, other.intervals)
            and self.start_offset_ms == other.start_offset_ms
            and self.filtered == other.filtered
        )

    def cumulative_times(self) -> np.ndarray:
        """End time of each interval, offset by ``start_offset_ms``."""
        return self.start_offset_ms + np.cumsum(self.intervals)


@dataclass(frozen=True, eq=False)
class HrSeries:
    t_ms: np.ndarray
    hr_bpm: np.ndarray

    def __post_init__(self):
        t = _frozen(self.t_ms)
        hr = _frozen(self.hr_bpm)
        if t.shape != hr.shape or t.ndim != 1:
            raise ValueError("t_ms and hr_bpm must be 1-D and equally long")
        if np.any(np.diff(t) <= 0):
            raise MonotonicityError("t_ms must be strictly increasing")
        if np.any(hr <= 0) or not np.all(np.isfinite(hr)):
            raise DomainError("hr_bpm must be finite and > 0")
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "hr_bpm", hr)

    def __len__(self):
        return self.t_ms.shape[0]

    def __eq__(self, other):
        if not isinstance(other, HrSeries):
            return NotImplemented
        return np.array_equal(self.t_ms, other.t_ms) and np.array_equal(self.hr_bpm, other.hr_bpm)


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    signal_path: str
    signal_kind: str
    stress_level: int
    flu_level: int
    sleep_hours: float | None = None
    temperature_c: float | None = None
    systole: int | None = None
    diastole: int | None = None


def _lines(text: str):
    # splitlines handles LF and CRLF alike
    return text.splitlines()


def _real(token: str, line: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise FormatError(f"{what}: {token.strip()!r} is not a number", line) from None
    if not math.isfinite(value):
        raise FormatError(f"{what}: {token.strip()!r} is not finite", line)
    return value


def parse_rr_file(text: str) -> RrSeries:
    """One interval (ms) per line; blank lines and ``#`` comments are skipped."""
    values = []
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        value = _real(line, lineno, "RR interval")
        if value <= 0:
            raise DomainError(f"RR interval must be > 0 ms, got {line}", lineno)
        values.append(value)
    if not values:
        raise EmptySeriesError("RR file contains no intervals", 1)
    return RrSeries(values)


def parse_hr_file(text: str) -> HrSeries:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != HR_HEADER:
        raise HeaderError(f"expected header {','.join(HR_HEADER)!r}", 1)
    t_vals: list[float] = []
    hr_vals: list[float] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise FormatError(f"expected 2 columns, got {len(row)}", lineno)
        t = _real(row[0], lineno, "t_ms")
        hr = _real(row[1], lineno, "hr_bpm")
        if hr <= 0:
            raise DomainError(f"hr_bpm must be > 0, got {row[1].strip()}", lineno)
        if t_vals and t <= t_vals[-1]:
            raise MonotonicityError(f"t_ms {row[0].strip()} does not increase", lineno)
        t_vals.append(t)
        hr_vals.append(hr)
    if not t_vals:
        raise EmptySeriesError("HR file contains no samples", 1)
    return HrSeries(t_vals, hr_vals)


def _optional(token: str, line: int, what: str, kind=float):
    token = token.strip()
    if not token:
        return None
    if kind is int:
        try:
            return int(token)
        except ValueError:
            raise FormatError(f"{what}: {token!r} is not an integer", line) from None
    return _real(token, line, what)


def _level(token: str, line: int, what: str) -> int:
    try:
        level = int(token.strip())
    except ValueError:
        raise FormatError(f"{what}: {token.strip()!r} is not an integer", line) from None
    lo, hi = LEVEL_RANGE
    if not lo <= level <= hi:
        raise RangeError(f"{what} must be in {lo}..{hi}, got {level}", line)
    return level


def parse_session_manifest(text: str) -> list[SessionRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != MANIFEST_HEADER:
        raise HeaderError(f"expected header {','.join(MANIFEST_HEADER)!r}", 1)
    records = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(MANIFEST_HEADER):
            raise FormatError(f"expected {len(MANIFEST_HEADER)} columns, got {len(row)}", lineno)
        sid = row[0].strip()
        if not sid:
            raise FormatError("session_id is empty", lineno)
        if sid in seen:
            raise DuplicateIdError(f"duplicate session_id {sid!r}", lineno)
        seen.add(sid)
        kind = row[2].strip()
        if kind not in SIGNAL_KINDS:
            raise FormatError(f"unknown signal_kind {kind!r}", lineno)
        sleep = _optional(row[5], lineno, "sleep_hours")
        if sleep is not None and sleep < 0:
            raise RangeError("sleep_hours must be >= 0", lineno)
        records.append(
            SessionRecord(
                session_id=sid,
                signal_path=row[1].strip(),
                signal_kind=kind,
                stress_level=_level(row[3], lineno, "stress_level"),
                flu_level=_level(row[4], lineno, "flu_level"),
                sleep_hours=sleep,
                temperature_c=_optional(row[6], lineno, "temperature_c"),
                systole=_optional(row[7], lineno, "systole", int),
                diastole=_optional(row[8], lineno, "diastole", int),
            )
        )
    return records


def _num(v) -> str:
    return "" if v is None else repr(v)


def format_rr(series: RrSeries) -> str:
    return "".join(f"{v!r}\n" for v in series.intervals.tolist())


def format_hr(series: HrSeries) -> str:
    lines = [",".join(HR_HEADER)]
    lines += [f"{t!r},{h!r}" for t, h in zip(series.t_ms.tolist(), series.hr_bpm.tolist())]
    return "\n".join(lines) + "\n"


def format_manifest(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_HEADER)
    for r in records:
        writer.writerow(
            [
                r.session_id,
                r.signal_path,
                r.signal_kind,
                r.stress_level,
                r.flu_level,
                _num(r.sleep_hours),
                _num(r.temperature_c),
                _num(r.systole),
                _num(r.diastole),
            ]
        )
    return buf.getvalue()


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def load_signal(path, kind: str):
    """Read an RR or HR file from disk; returns ``RrSeries`` or ``HrSeries``."""
    if kind == "rr":
        return parse_rr_file(read_text(path))
    if kind == "hr":
        return parse_hr_file(read_text(path))
    raise ValueError(f"unknown signal kind {kind!r}")
