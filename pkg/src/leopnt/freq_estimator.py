"""Two-step carrier frequency estimation for detected bursts.

The coarse step searches a grid of trial offsets for the one that
maximizes the full-sequence correlation at the detected lag.  The fine
step averages the phase rotation between neighbouring partial
correlations; its result is ambiguous by multiples of 1/(L̇c·Ts) and the
coarse value picks the branch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .detector import DetectionEvent, _segment, partials_at
from .signal_model import NUM_SUBSEQUENCES, IqSignal, SyncSequence, phase_ramp

log = logging.getLogger(__name__)

# arg(d^{k-1} conj(d^k)) = -2π·Δf·L̇c·Ts for a positive offset Δf, so the
# accumulated phase is negated to report offsets with their physical sign.
PHASE_SIGN = -1.0

GRID_CHUNK = 64


@lru_cache(maxsize=16)
def _ramp_matrix(n: int, freqs: tuple, sample_rate: float) -> np.ndarray:
    # Conjugate ramps: the trial template is ref·exp(+j2πΔf·Ts·n).
    out = np.stack([phase_ramp(n, -f, sample_rate) for f in freqs])
    out.setflags(write=False)
    return out


class UnreliableEstimate(ValueError):
    """Raised when the partial correlations are too weak to carry a phase."""


@dataclass(frozen=True)
class FrequencyGrid:
    f_min: float
    f_max: float
    step: float

    def values(self) -> np.ndarray:
        if self.step <= 0 or self.f_max < self.f_min:
            raise ValueError("empty frequency grid")
        n = int(np.floor((self.f_max - self.f_min) / self.step + 1e-9)) + 1
        return self.f_min + self.step * np.arange(n)

    @classmethod
    def default(cls, sync: SyncSequence, span: float = 600e3) -> "FrequencyGrid":
        """Step of a quarter of the full-sequence resolution over ``±span``.

        The grid is symmetric about zero so that zero offset is a member.
        """
        step = sync.sample_rate / (4 * sync.total_len)
        n = int(np.ceil(span / step))
        return cls(-n * step, n * step, step)


@dataclass(frozen=True, eq=False)
class FrequencyEstimate:
    coarse: float
    fine: float
    ambiguity_index: int
    raw: float
    detection: DetectionEvent = None

    @property
    def sample_index(self):
        return None if self.detection is None else self.detection.sample_index


def _grid_array(grid) -> np.ndarray:
    if isinstance(grid, FrequencyGrid):
        values = grid.values()
    elif isinstance(grid, tuple) and len(grid) == 3 and not isinstance(grid[0], (list, np.ndarray)):
        values = FrequencyGrid(*grid).values()
    else:
        values = np.atleast_1d(np.asarray(grid, dtype=float))
    if values.size == 0:
        raise ValueError("empty frequency grid")
    return values


def coarse_scores(s: IqSignal, eps: SyncSequence, lag: int, grid) -> tuple:
    """Normalized |r| at ``lag`` for every trial offset in ``grid``."""
    freqs = _grid_array(grid)
    ref = eps.render()
    seg = _segment(s.samples, lag, ref.size).astype(np.complex128)
    norm = np.sqrt(np.vdot(seg, seg).real * np.vdot(ref, ref).real)
    prod = seg * np.conj(ref)
    scores = np.empty(freqs.size)
    for i in range(0, freqs.size, GRID_CHUNK):
        f = tuple(freqs[i:i + GRID_CHUNK].tolist())
        scores[i:i + len(f)] = np.abs(_ramp_matrix(ref.size, f, eps.sample_rate) @ prod)
    if norm > 0:
        scores /= norm
    return freqs, scores


def coarse_estimate(s: IqSignal, eps: SyncSequence, lag: int, grid) -> float:
    """Trial offset maximizing the full-sequence correlation at ``lag``.

    ``grid`` is a :class:`FrequencyGrid`, a ``(f_min, f_max, step)`` tuple
    or an explicit array.  Ties go to the smallest magnitude offset.
    """
    freqs, scores = coarse_scores(s, eps, lag, grid)
    order = np.lexsort((freqs, np.abs(freqs)))
    return float(freqs[order[np.argmax(scores[order])]])


def fine_estimate(event: DetectionEvent, coarse: float, subseq_len: int, sample_rate: float) -> FrequencyEstimate:
    d = np.asarray(event.partials, dtype=np.complex128)
    if d.size != NUM_SUBSEQUENCES:
        raise ValueError("event must carry eight partial correlations")
    mags = np.abs(d)
    scale = mags.sum()
    if scale == 0 or np.any(mags < 1e3 * np.finfo(float).eps * scale):
        raise UnreliableEstimate(f"partial correlation too weak at lag {event.sample_index}")
    period = subseq_len / sample_rate
    acc = np.sum(d[:-1] * np.conj(d[1:]))
    raw = PHASE_SIGN * np.angle(acc) / (2 * np.pi * period)
    g = int(np.round((coarse - raw) * period))
    return FrequencyEstimate(coarse, raw + g / period, g, raw, event)


def estimate_one(s: IqSignal, eps: SyncSequence, event: DetectionEvent, grid) -> FrequencyEstimate:
    coarse = coarse_estimate(s, eps, event.sample_index, grid)
    return fine_estimate(event, coarse, eps.subseq_len, eps.sample_rate)


def estimate_all(s: IqSignal, eps: SyncSequence, events, grid=None):
    """Coarse plus fine estimate for every event, in order.

    Returns ``(estimates, errors)``; an event that fails lands in ``errors``
    as ``(event, exception)`` without stopping the batch.
    """
    if grid is None:
        grid = FrequencyGrid.default(eps)
    estimates, errors = [], []
    for event in events:
        try:
            estimates.append(estimate_one(s, eps, event, grid))
        except ValueError as exc:
            log.warning("estimate failed at lag %d: %s", event.sample_index, exc)
            errors.append((event, exc))
    return estimates, errors


def event_at(s: IqSignal, eps: SyncSequence, lag: int) -> DetectionEvent:
    """A detection event at a known lag, for estimation without detection."""
    return DetectionEvent(lag, float("nan"), partials_at(s, eps, lag), eps.name)


def refine_lag(s: IqSignal, eps: SyncSequence, event: DetectionEvent, grid=None, reach: int = 2) -> DetectionEvent:
    """Move ``event`` to the best of ``lag + q * subseq_len``, ``|q| <= reach``.

    The partial-magnitude statistic shares all but one term between a lag
    and its neighbour one subsequence away, so in noise it can lock onto a
    shifted copy.  The frequency-compensated full-sequence correlation
    does not share that ambiguity because the sign pattern breaks
    coherence at the shifted lags.
    """
    if grid is None:
        grid = FrequencyGrid.default(eps)
    candidates = [event.sample_index + q * eps.subseq_len for q in range(-reach, reach + 1)]
    best = max(candidates, key=lambda lag: (coarse_scores(s, eps, lag, grid)[1].max(), -abs(lag - event.sample_index)))
    if best == event.sample_index:
        return event
    partials = partials_at(s, eps, best)
    return replace(event, sample_index=best, partials=partials,
                   statistic=float(np.abs(partials).sum() / event.norm))


def refine_events(s: IqSignal, eps: SyncSequence, events, grid=None, reach: int = 2) -> list:
    """:func:`refine_lag` over a detection list, dropping duplicates that collapse together."""
    refined = {}
    for event in events:
        ev = refine_lag(s, eps, event, grid, reach)
        if ev.sample_index not in refined or ev.statistic > refined[ev.sample_index].statistic:
            refined[ev.sample_index] = ev
    return [refined[k] for k in sorted(refined)]
