"""
Finding uplink bursts buried in noise
=====================================

A train of uplink bursts at -20 dB per-sample SNR, each with its own
carrier offset, is detected with the partial-correlation statistic.
"""

import numpy as np

from leopnt.detector import DEFAULT_THRESHOLD, detect_bursts, detection_statistic
from leopnt.freq_estimator import refine_events
from leopnt.signal_model import UPLINK, synthesize_train

eps = UPLINK.sync_sequence(seed=1)
print(f"sequence: {eps.total_len} samples, subsequence {eps.subseq_len}, prefix {eps.prefix_len}")

# Ten bursts, 60000 samples apart, offsets up to ±50 kHz
rng = np.random.default_rng(0)
starts = [20_000 + 60_000 * i for i in range(10)]
offsets = rng.uniform(-50e3, 50e3, len(starts))
sig = synthesize_train(eps, starts, starts[-1] + 60_000, noise_variance=100.0,
                       seed=0, data_len=20_000, freq_offsets=offsets)

# The statistic is near 0.03 on noise and near 0.1 on a burst at this SNR
stat = detection_statistic(sig, eps)
print(f"statistic: median {np.median(stat.values):.3f}, max {stat.values.max():.3f}")

events = detect_bursts(stat, DEFAULT_THRESHOLD)

# A peak can land one subsequence away from the true start; the
# frequency-compensated full correlation settles which one is right.
events = refine_events(sig, eps, events)

for e, true_start in zip(events, starts):
    print(f"  detected {e.sample_index:>8d}  true {true_start:>8d}  statistic {e.statistic:.3f}")
print(f"{len(events)} events for {len(starts)} bursts")
