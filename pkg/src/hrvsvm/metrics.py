"""HR <-> IBI conversion and the time-domain HRV metric bundle."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import EmptySeriesError, MonotonicityError
from .ingest import HrSeries, RrSeries

MS_PER_MINUTE = 60000.0
SDANN_SEGMENT_MS = 300000.0


@dataclass(frozen=True)
class HrvMetrics:
    mean_hr: float
    mean_rr: float
    sdev_hr: float
    sdev_nn: float
    rmssd: float
    sdann: float | None
    nnx_count: int
    pnnx: float
    x_threshold_ms: float = 50.0

    def as_dict(self) -> dict:
        return asdict(self)


def ibi_from_beats(beat_times) -> RrSeries:
    beats = np.asarray(beat_times, dtype=np.float64)
    if beats.ndim != 1 or beats.shape[0] < 2:
        raise EmptySeriesError("need at least 2 beat times")
    intervals = np.diff(beats)
    if np.any(intervals <= 0):
        bad = int(np.argmax(intervals <= 0)) + 1
        raise MonotonicityError(f"beat times must strictly increase (beat {bad + 1})")
    return RrSeries(intervals, start_offset_ms=beats[0])


def ibi_from_hr(hr: HrSeries) -> RrSeries:
    if len(hr) == 0:
        raise EmptySeriesError("heart-rate series is empty")
    return RrSeries(MS_PER_MINUTE / hr.hr_bpm, start_offset_ms=hr.t_ms[0])


def hr_from_ibi(rr: RrSeries) -> HrSeries:
    if len(rr) == 0:
        raise EmptySeriesError("RR series is empty")
    return HrSeries(rr.cumulative_times(), MS_PER_MINUTE / rr.intervals)


def as_rr(signal) -> RrSeries:
    return ibi_from_hr(signal) if isinstance(signal, HrSeries) else signal


def filter_ectopic(rr: RrSeries, tolerance_fraction: float = 0.2) -> RrSeries:
    """Drop intervals that stray from their 5-beat moving median.

    An interval is removed when it differs from the median of the window
    spanning two neighbours on each side (clipped at the ends) by more than
    ``tolerance_fraction`` times that median. The rule is reapplied until
    nothing changes, so filtering twice equals filtering once. The result is
    meant for statistics: it is flagged ``filtered`` and its cumulative times
    no longer line up with the original recording.
    """
    if not 0 < tolerance_fraction < 1:
        raise ValueError("tolerance_fraction must lie in (0, 1)")
    values = np.ascontiguousarray(rr.intervals, dtype=np.float64)
    while values.size:
        keep = kernels.ectopic_mask(values, float(tolerance_fraction))
        if keep.all():
            break
        values = values[keep]
    return RrSeries(values, start_offset_ms=rr.start_offset_ms, filtered=True)


def segment_means(rr: RrSeries, segment_ms: float = SDANN_SEGMENT_MS) -> np.ndarray:
    """Means of complete, non-overlapping segments by elapsed time.

    An interval belongs to segment k when its end time t (relative to the
    series start) satisfies k*segment_ms < t <= (k+1)*segment_ms. The trailing
    partial segment is dropped.
    """
    elapsed = np.cumsum(rr.intervals)
    complete = int(elapsed[-1] // segment_ms) if elapsed.size else 0
    seg = np.ceil(elapsed / segment_ms).astype(np.int64) - 1
    means = []
    for k in range(complete):
        members = rr.intervals[seg == k]
        if members.size:
            means.append(members.mean())
    return np.asarray(means)


def _sample_std(values: np.ndarray) -> float:
    # exact zero for constant input; np.std can leave rounding residue
    if np.all(values == values[0]):
        return 0.0
    return float(values.std(ddof=1))


def compute_metrics(rr: RrSeries, x_threshold_ms: float = 50.0) -> HrvMetrics:
    """Time-domain HRV metrics; sample (N-1) standard deviations throughout."""
    n = len(rr)
    if n < 2:
        raise EmptySeriesError(f"need at least 2 intervals, got {n}")
    intervals = rr.intervals
    hr = MS_PER_MINUTE / intervals
    diffs = np.diff(intervals)
    nnx = int(np.count_nonzero(np.abs(diffs) > x_threshold_ms))
    means = segment_means(rr)
    return HrvMetrics(
        mean_hr=float(hr.mean()),
        mean_rr=float(intervals.mean()),
        sdev_hr=_sample_std(hr),
        sdev_nn=_sample_std(intervals),
        rmssd=float(math.sqrt(np.mean(diffs * diffs))),
        sdann=_sample_std(means) if means.size >= 2 else None,
        nnx_count=nnx,
        pnnx=nnx / (n - 1),
        x_threshold_ms=float(x_threshold_ms),
    )


def _fmt(value: float) -> str:
    return format(value, ".15g")


def format_metrics(m: HrvMetrics) -> str:
    """Flat key=value lines; ``sdann`` is omitted when it could not be computed."""
    x = _fmt(m.x_threshold_ms)
    pairs = [
        ("mean_hr", _fmt(m.mean_hr)),
        ("mean_rr", _fmt(m.mean_rr)),
        ("sdev_hr", _fmt(m.sdev_hr)),
        ("sdev_nn", _fmt(m.sdev_nn)),
        ("rmssd", _fmt(m.rmssd)),
    ]
    if m.sdann is not None:
        pairs.append(("sdann", _fmt(m.sdann)))
    pairs += [(f"nn{x}", str(m.nnx_count)), (f"pnn{x}", _fmt(m.pnnx))]
    return "".join(f"{k}={v}\n" for k, v in pairs)
