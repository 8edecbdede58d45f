"""Correlation-based burst detection.

Two statistics are available: the plain normalized cross-correlation of a
record against the full synchronization sequence, and the detection
statistic that adds the magnitudes of the eight partial correlations
against the individual subsequences.  The latter discards the phase
rotation between subsequences and therefore tolerates carrier offsets
that would smear the full-length correlation.

All correlations use the convention ``r[l] = sum_n y1[n] * conj(y2[n - l])``
so that a copy of ``y2`` starting at sample ``m`` of ``y1`` peaks at ``l = m``.
Samples outside the record are treated as zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.ndimage import maximum_filter1d

from .signal_model import NUM_SUBSEQUENCES, IqSignal, SyncSequence

MIN_FFT = 1 << 16

# Calibrated with the noise-only Monte-Carlo in tests/test_detector.py for
# the uplink subsequence length; roughly 2.4/sqrt(L̇c) above the noise floor.
DEFAULT_THRESHOLD = 0.07


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    """Correlation values indexed by lag; ``values[i]`` is lag ``lag_origin + i``."""

    values: np.ndarray
    lag_origin: int = 0
    normalized: bool = True

    def __len__(self) -> int:
        return self.values.size

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.lag_origin, self.lag_origin + self.values.size)

    def at(self, lag: int):
        return self.values[lag - self.lag_origin]

    def peak_lag(self) -> int:
        return int(np.argmax(np.abs(self.values))) + self.lag_origin


@dataclass(frozen=True, eq=False)
class DetectionStatistic(CorrelationSeries):
    """Detection statistic plus what is needed to recover the partials."""

    signal: IqSignal = None
    sync: SyncSequence = None
    norm: float = 0.0

    def partials_at(self, lag: int) -> np.ndarray:
        return partials_at(self.signal, self.sync, lag)


@dataclass(frozen=True, eq=False)
class DetectionEvent:
    sample_index: int
    statistic: float
    partials: np.ndarray
    representative_id: str = "eps"
    norm: float = 1.0
    low_confidence: bool = False

    def recompute_statistic(self) -> float:
        return float(np.sum(np.abs(self.partials)) / self.norm)


def _segment(x: np.ndarray, start: int, length: int) -> np.ndarray:
    """x[start:start+length] with zeros where the window leaves the array."""
    out = np.zeros(length, dtype=x.dtype)
    lo, hi = max(start, 0), min(start + length, x.size)
    if hi > lo:
        out[lo - start:hi - start] = x[lo:hi]
    return out


def _common_dtype(*arrays) -> np.dtype:
    if all(a.dtype == np.complex64 for a in arrays):
        return np.dtype(np.complex64)
    return np.dtype(np.complex128)


def _correlation_blocks(x: np.ndarray, h: np.ndarray, lag_start: int, lag_stop: int, extra: int = 0):
    """Overlap-save correlation of ``x`` against template ``h``.

    Yields ``(lag, count, c)`` where ``c[i]`` is the correlation at lag
    ``lag + i`` for ``i < count + extra``.  ``extra`` lets callers read a
    fixed distance past each block, as the partial correlations need.
    """
    dtype = _common_dtype(x, h)
    span = extra + h.size
    nfft = sfft.next_fast_len(max(MIN_FFT, 8 * span))
    block = nfft - span + 1
    h_spec = np.conj(sfft.fft(h.astype(dtype, copy=False), nfft))
    lag = lag_start
    while lag < lag_stop:
        count = min(block, lag_stop - lag)
        seg = _segment(x, lag, nfft).astype(dtype, copy=False)
        c = sfft.ifft(sfft.fft(seg) * h_spec)
        yield lag, count, c[:count + extra]
        lag += count


def correlate(x: np.ndarray, h: np.ndarray, lag_start: int, lag_stop: int) -> np.ndarray:
    """Transform-based ``sum_n x[n] * conj(h[n - l])`` for ``lag_start <= l < lag_stop``."""
    x = np.asarray(x)
    h = np.asarray(h)
    out = np.empty(max(lag_stop - lag_start, 0), dtype=_common_dtype(x, h))
    for lag, count, c in _correlation_blocks(x, h, lag_start, lag_stop):
        out[lag - lag_start:lag - lag_start + count] = c[:count]
    return out


def correlate_direct(x: np.ndarray, h: np.ndarray, lag_start: int, lag_stop: int) -> np.ndarray:
    """Same sum as :func:`correlate`, evaluated lag by lag."""
    out = np.empty(max(lag_stop - lag_start, 0), dtype=np.complex128)
    for i, lag in enumerate(range(lag_start, lag_stop)):
        out[i] = np.vdot(h, _segment(x, lag, h.size))
    return out


def _energy(x: np.ndarray) -> float:
    return float(np.vdot(x, x).real)


def xcorr_normalized(y1: IqSignal, y2: IqSignal) -> CorrelationSeries:
    """Full-range cross-correlation normalized at its magnitude peak.

    Lags run from ``-(len(y2) - 1)`` to ``len(y1) - 1``.  The normalization
    uses the energy of ``y2`` and of the ``len(y2)`` samples of ``y1`` that
    start at the peak lag, so the peak magnitude is at most one.
    """
    if y1.sample_rate != y2.sample_rate:
        raise ValueError("signals must share a sample rate")
    if not len(y1) > len(y2) > 0:
        raise ValueError("need len(y1) > len(y2) > 0")
    e2 = _energy(y2.samples)
    if e2 == 0:
        raise ValueError("y2 has zero energy")
    origin = -(len(y2) - 1)
    raw = correlate(y1.samples, y2.samples, origin, len(y1))
    peak = int(np.argmax(np.abs(raw))) + origin
    e1 = _energy(_segment(y1.samples, peak, len(y2)))
    if e1 == 0:
        return CorrelationSeries(np.zeros_like(raw), origin, True)
    return CorrelationSeries(raw / np.sqrt(e1 * e2), origin, True)


def _default_range(s: IqSignal, eps: SyncSequence, lag_range):
    if lag_range is None:
        return 0, max(len(s) - eps.total_len + 1, 0)
    start, stop = (int(v) for v in lag_range)
    if stop <= start:
        raise ValueError("empty lag range")
    return start, stop


def _check_pair(s: IqSignal, eps: SyncSequence):
    if s.sample_rate != eps.sample_rate:
        raise ValueError(
            f"sample rates differ: signal {s.sample_rate}, representative {eps.sample_rate}"
        )
    if eps.subseq_energy == 0:
        raise ValueError("representative has zero energy")


def partials_at(s: IqSignal, eps: SyncSequence, lag: int) -> np.ndarray:
    """The eight partial correlations at one lag, evaluated directly."""
    out = np.empty(NUM_SUBSEQUENCES, dtype=np.complex128)
    for k in range(NUM_SUBSEQUENCES):
        seg = _segment(s.samples, lag + eps.offset(k), eps.subseq_len)
        out[k] = eps.sign_pattern[k] * np.vdot(eps.subseq, seg.astype(np.complex128))
    return out


def partial_correlations(s: IqSignal, eps: SyncSequence, lag_range=None) -> np.ndarray:
    """Partial correlations ``d^k[l]``, shape ``(8, n_lags)``.

    ``d^k[l]`` correlates ``s`` with subsequence ``k`` of ``eps`` placed at
    ``l + prefix + k * subseq_len``.  ``lag_range`` is a half-open
    ``(start, stop)`` pair defaulting to every lag where the whole sequence
    fits in ``s``; lags beyond the record see zero padding.
    """
    _check_pair(s, eps)
    if lag_range is None and len(s) < eps.total_len:
        raise ValueError("signal shorter than the synchronization sequence")
    start, stop = _default_range(s, eps, lag_range)
    extra = eps.offset(NUM_SUBSEQUENCES - 1)
    out = np.empty((NUM_SUBSEQUENCES, stop - start), dtype=_common_dtype(s.samples, eps.subseq))
    for lag, count, c in _correlation_blocks(s.samples, eps.subseq, start, stop, extra):
        i = lag - start
        for k in range(NUM_SUBSEQUENCES):
            off = eps.offset(k)
            out[k, i:i + count] = eps.sign_pattern[k] * c[off:off + count]
    return out


def partial_norm(s: IqSignal, eps: SyncSequence, lag: int) -> float:
    """Sum over k of sqrt(E(aligned slice of s) * E(eps^k)) at ``lag``."""
    e_eps = eps.subseq_energy
    total = 0.0
    for k in range(NUM_SUBSEQUENCES):
        seg = _segment(s.samples, lag + eps.offset(k), eps.subseq_len).astype(np.complex128)
        total += np.sqrt(_energy(seg) * e_eps)
    return total


def detection_statistic(s: IqSignal, eps: SyncSequence, lag_range=None) -> DetectionStatistic:
    """Sum of partial-correlation magnitudes, normalized at its global peak.

    The sum is computed block by block from a single correlation against the
    subsequence, so memory stays at one real value per lag.  Values lie in
    [0, 1] and are invariant to a complex gain on ``s``.
    """
    _check_pair(s, eps)
    if lag_range is None and len(s) < eps.total_len:
        raise ValueError("signal shorter than the synchronization sequence")
    start, stop = _default_range(s, eps, lag_range)
    extra = eps.offset(NUM_SUBSEQUENCES - 1)
    real = np.float32 if s.samples.dtype == np.complex64 else np.float64
    raw = np.empty(stop - start, dtype=real)
    for lag, count, c in _correlation_blocks(s.samples, eps.subseq, start, stop, extra):
        acc = raw[lag - start:lag - start + count]
        acc[:] = 0
        for k in range(NUM_SUBSEQUENCES):
            off = eps.offset(k)
            acc += np.abs(c[off:off + count])
    peak = int(np.argmax(raw)) + start
    norm = partial_norm(s, eps, peak)
    if norm > 0:
        raw /= real(norm)
    return DetectionStatistic(raw, start, True, signal=s, sync=eps, norm=norm)


def detect_bursts(stat: DetectionStatistic, threshold: float = DEFAULT_THRESHOLD, window: int = None) -> list:
    """Pick lags above ``threshold`` that are the maximum within ``±window/2``.

    Among equal values inside one window the smaller lag wins.  ``window``
    must exceed the sequence length and defaults to twice it, which also
    covers the self-similar side peaks at multiples of the subsequence
    length.  Events within one sequence length of either record edge are
    flagged ``low_confidence``.
    """
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    seq_len = stat.sync.total_len
    if window is None:
        window = 2 * seq_len
    if window <= seq_len:
        raise ValueError(f"window {window} must exceed the sequence length {seq_len}")
    values = stat.values
    half = window // 2
    local_max = maximum_filter1d(values, size=2 * half + 1, mode="constant", cval=-np.inf)
    candidates = np.flatnonzero((values > threshold) & (values == local_max))
    events = []
    kept = []
    for idx in candidates:
        if kept and idx - kept[-1] <= half and values[kept[-1]] == values[idx]:
            continue
        kept.append(idx)
    n_record = len(stat.signal)
    for idx in kept:
        lag = int(idx) + stat.lag_origin
        events.append(DetectionEvent(
            sample_index=lag,
            statistic=float(values[idx]),
            partials=stat.partials_at(lag),
            representative_id=stat.sync.name,
            norm=stat.norm,
            low_confidence=lag < seq_len or lag + 2 * seq_len > n_record,
        ))
    return events
