"""Burst and synchronization-sequence model.

A received burst is a complex gain times the synchronization sequence
followed by a data segment, rotated by a constant carrier offset and
buried in white Gaussian noise.  The synchronization sequence is a
cyclic prefix followed by eight sign-modulated copies of one subsequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

DEFAULT_SIGN_PATTERN = (-1, 1, 1, 1, 1, 1, 1, 1)
NUM_SUBSEQUENCES = 8


@dataclass(frozen=True, eq=False)
class IqSignal:
    """Complex baseband samples at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.iscomplexobj(samples):
            samples = samples.astype(np.complex128)
        object.__setattr__(self, "samples", samples)
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def sample_period(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True, eq=False)
class SyncSequence:
    """Prefix plus eight copies of ``subseq`` weighted by ``sign_pattern``.

    The prefix is the trailing ``prefix_fraction * subseq_len`` samples of
    the first (sign-weighted) copy.
    """

    subseq: np.ndarray
    prefix_fraction: Fraction
    sign_pattern: tuple = DEFAULT_SIGN_PATTERN
    sample_rate: float = 1.0
    name: str = "eps"

    @property
    def subseq_len(self) -> int:
        return self.subseq.size

    @property
    def prefix_len(self) -> int:
        return int(self.prefix_fraction * self.subseq_len)

    @property
    def total_len(self) -> int:
        return self.prefix_len + NUM_SUBSEQUENCES * self.subseq_len

    def offset(self, k: int) -> int:
        """Start of subsequence ``k`` relative to the start of the sequence."""
        return self.prefix_len + k * self.subseq_len

    def subsequence(self, k: int) -> np.ndarray:
        return self.sign_pattern[k] * self.subseq

    def render(self) -> np.ndarray:
        first = self.subsequence(0)
        parts = [first[first.size - self.prefix_len:]] if self.prefix_len else []
        parts += [self.subsequence(k) for k in range(NUM_SUBSEQUENCES)]
        return np.concatenate(parts)

    def to_signal(self) -> IqSignal:
        return IqSignal(self.render(), self.sample_rate)

    @property
    def subseq_energy(self) -> float:
        return float(np.vdot(self.subseq, self.subseq).real)


def build_sync_sequence(
    subseq,
    prefix_fraction,
    sign_pattern: Sequence[int] = DEFAULT_SIGN_PATTERN,
    sample_rate: float = 1.0,
    name: str = "eps",
) -> SyncSequence:
    """Validate the pieces of a synchronization sequence and bundle them.

    ``prefix_fraction`` may be an int, a ``Fraction``, a ``"p/q"`` string or
    a float; floats are converted to the nearest fraction with a
    denominator up to 10**6.
    """
    subseq = np.asarray(subseq, dtype=np.complex128).ravel()
    if subseq.size == 0:
        raise ValueError("subsequence must not be empty")
    if isinstance(prefix_fraction, float):
        gamma = Fraction(prefix_fraction).limit_denominator(10**6)
    else:
        gamma = Fraction(prefix_fraction)
    if gamma < 0 or gamma > 1:
        raise ValueError(f"prefix fraction must lie in [0, 1], got {gamma}")
    prefix = gamma * subseq.size
    if prefix.denominator != 1:
        raise ValueError(
            f"prefix length {gamma} * {subseq.size} = {float(prefix):g} is not "
            "an integer number of samples"
        )
    signs = tuple(int(s) for s in sign_pattern)
    if len(signs) != NUM_SUBSEQUENCES or any(s not in (-1, 1) for s in signs):
        raise ValueError("sign_pattern must hold eight entries from {-1, +1}")
    if not sample_rate > 0:
        raise ValueError("sample_rate must be positive")
    subseq.setflags(write=False)
    return SyncSequence(subseq, gamma, signs, float(sample_rate), name)


def qpsk(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-power QPSK chips."""
    bits = rng.integers(0, 2, size=(2, n))
    return ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / np.sqrt(2)


@dataclass(frozen=True)
class UplinkProfile:
    """Structure of the user-terminal uplink burst as recorded at 562.5 MS/s."""

    subseq_len: int = 1200
    prefix_len: int = 220
    sample_rate: float = 562_500_000.0
    subchannel_bandwidth: float = 62.5e6
    bri_set: tuple = (6.67e-3, 8.00e-3, 9.33e-3, 10.67e-3, 16.00e-3, 18.67e-3)
    duration_step: float = 17.87e-6

    @property
    def prefix_fraction(self) -> Fraction:
        return Fraction(self.prefix_len, self.subseq_len)

    @property
    def total_len(self) -> int:
        return self.prefix_len + NUM_SUBSEQUENCES * self.subseq_len

    @property
    def ambiguity(self) -> float:
        """Unambiguous span 1/(L̇c·Ts) of the phase-difference estimator."""
        return self.sample_rate / self.subseq_len

    def sync_sequence(self, seed: int = 0) -> SyncSequence:
        rng = np.random.default_rng(seed)
        return build_sync_sequence(
            qpsk(self.subseq_len, rng),
            self.prefix_fraction,
            sample_rate=self.sample_rate,
            name=f"uplink-{seed}",
        )


@dataclass(frozen=True)
class DownlinkProfile:
    """Structure of the user downlink frame header.

    Each subsequence carries 127 symbols of period ``symbol_period``; the
    model holds every symbol for ``oversample`` samples so that the 1/32
    prefix is an integer number of samples.
    """

    symbols_per_subseq: int = 127
    prefix_fraction: Fraction = Fraction(1, 32)
    subseq_duration: float = 4.27e-6
    bandwidth: float = 240e6
    frame_period: float = 1 / 750
    symbol_period: float = 4.17e-9
    oversample: int = 32

    @property
    def observed_symbols(self) -> int:
        return NUM_SUBSEQUENCES * self.symbols_per_subseq

    @property
    def sample_rate(self) -> float:
        return self.oversample / self.symbol_period

    @property
    def subseq_len(self) -> int:
        return self.symbols_per_subseq * self.oversample

    def sync_sequence(self, seed: int = 0) -> SyncSequence:
        rng = np.random.default_rng(seed)
        symbols = qpsk(self.symbols_per_subseq, rng)
        return build_sync_sequence(
            np.repeat(symbols, self.oversample),
            self.prefix_fraction,
            sample_rate=self.sample_rate,
            name=f"downlink-{seed}",
        )

    def noise_variance(self, snr: float) -> float:
        """Per-sample noise variance giving symbol energy to noise density ``snr``."""
        return self.oversample / snr


UPLINK = UplinkProfile()
DOWNLINK = DownlinkProfile()


@dataclass(frozen=True)
class BurstSpec:
    sync: SyncSequence
    data_len: int = 0
    freq_offset: float = 0.0
    gain: complex = 1.0
    guard_before: int = 0
    guard_after: int = 0

    def __post_init__(self):
        if self.data_len < 0:
            raise ValueError("data_len must be non-negative")
        if self.guard_before < 0 or self.guard_after < 0:
            raise ValueError("guards must be non-negative")

    @property
    def burst_len(self) -> int:
        return self.sync.total_len + self.data_len

    @property
    def length(self) -> int:
        return self.guard_before + self.burst_len + self.guard_after


def phase_ramp(n_samples: int, delta_f: float, sample_rate: float, start: int = 0) -> np.ndarray:
    """exp(j2π·Δf·Ts·n) for n = start .. start + n_samples - 1."""
    n = np.arange(start, start + n_samples, dtype=np.float64)
    # Reduce cycles mod 1 before the exponential so integer-cycle shifts stay exact.
    cycles = np.mod((delta_f / sample_rate) * n, 1.0)
    return np.exp(2j * np.pi * cycles)


def apply_frequency_shift(signal: IqSignal, delta_f: float) -> IqSignal:
    ramp = phase_ramp(len(signal), delta_f, signal.sample_rate)
    shifted = (signal.samples * ramp).astype(signal.samples.dtype, copy=False)
    return IqSignal(shifted, signal.sample_rate)


def complex_noise(rng: np.random.Generator, n: int, variance: float, dtype=np.complex128) -> np.ndarray:
    """Circularly-symmetric white Gaussian noise with ``variance`` per complex sample."""
    real_dtype = np.float32 if dtype == np.complex64 else np.float64
    out = np.empty(n, dtype=dtype)
    if n:
        view = out.view(real_dtype)
        rng.standard_normal(out=view, dtype=real_dtype)
        view *= real_dtype(np.sqrt(variance / 2))
    return out


def _burst_body(spec: BurstSpec, rng: np.random.Generator) -> np.ndarray:
    body = np.concatenate([spec.sync.render(), qpsk(spec.data_len, rng)])
    return spec.gain * body * phase_ramp(body.size, spec.freq_offset, spec.sync.sample_rate)


def synthesize_burst(spec: BurstSpec, noise_variance: float = 0.0, seed: int = 0) -> IqSignal:
    """Render one burst between its noise-only guards.

    The carrier rotation is referenced to the first sync sample.  Data
    chips are drawn before the noise from the same seeded generator.
    """
    if noise_variance < 0:
        raise ValueError("noise_variance must be non-negative")
    rng = np.random.default_rng(seed)
    body = _burst_body(spec, rng)
    out = np.zeros(spec.length, dtype=np.complex128)
    out[spec.guard_before:spec.guard_before + body.size] = body
    if noise_variance > 0:
        out += complex_noise(rng, out.size, noise_variance)
    return IqSignal(out, spec.sync.sample_rate)


def synthesize_train(
    sync: SyncSequence,
    starts: Sequence[int],
    total_len: int,
    noise_variance: float = 0.0,
    seed: int = 0,
    data_len: int = 0,
    freq_offsets=0.0,
    gains=1.0,
    dtype=np.complex64,
) -> IqSignal:
    """Several bursts placed at ``starts`` inside one noisy record.

    ``freq_offsets`` and ``gains`` are scalars or per-burst sequences.
    The default ``complex64`` keeps long records within memory.
    """
    starts = [int(s) for s in starts]
    offsets = np.broadcast_to(np.asarray(freq_offsets, dtype=float), (len(starts),))
    gains = np.broadcast_to(np.asarray(gains, dtype=complex), (len(starts),))
    rng = np.random.default_rng(seed)
    out = complex_noise(rng, total_len, noise_variance, dtype) if noise_variance > 0 \
        else np.zeros(total_len, dtype=dtype)
    for start, f, g in zip(starts, offsets, gains):
        spec = BurstSpec(sync, data_len=data_len, freq_offset=float(f), gain=complex(g))
        if start < 0 or start + spec.burst_len > total_len:
            raise ValueError(f"burst at {start} does not fit in {total_len} samples")
        out[start:start + spec.burst_len] += _burst_body(spec, rng).astype(dtype)
    return IqSignal(out, sync.sample_rate)


def bri_starts(n_bursts: int, bri: float, sample_rate: float, first: int = 0) -> list[int]:
    """Burst start indices for a constant repetition interval ``bri`` in seconds."""
    return [first + int(round(i * bri * sample_rate)) for i in range(n_bursts)]
