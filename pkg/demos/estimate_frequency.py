"""
Carrier offset of a downlink frame header
=========================================

Coarse grid search, then the phase-difference estimator, compared with
the modified Cramér-Rao bound over a range of SNRs.
"""

import numpy as np

from leopnt.bounds import mcrb_frequency
from leopnt.freq_estimator import FrequencyGrid, estimate_one, event_at
from leopnt.signal_model import DOWNLINK, BurstSpec, synthesize_burst

eps = DOWNLINK.sync_sequence(seed=1)
grid = FrequencyGrid.default(eps)
ambiguity = eps.sample_rate / eps.subseq_len
print(f"fine estimator wraps every {ambiguity / 1e6:.3f} MHz; grid step {grid.step / 1e3:.1f} kHz")

# One noiseless burst well past the wrap point
spec = BurstSpec(eps, freq_offset=1.3e6, guard_before=500, guard_after=500)
sig = synthesize_burst(spec)
est = estimate_one(sig, eps, event_at(sig, eps, 500), FrequencyGrid(-2e6, 2e6, grid.step))
print(f"true 1.3 MHz: coarse {est.coarse:.0f} Hz, raw {est.raw:.1f} Hz, "
      f"branch {est.ambiguity_index}, fine {est.fine:.6f} Hz")

# Monte Carlo against the bound
rng = np.random.default_rng(3)
print("SNR dB   RMSE Hz   sqrt(MCRB) Hz   ratio")
for snr_db in (-10, 0, 10):
    snr = 10 ** (snr_db / 10)
    errs = []
    for _ in range(100):
        df = rng.uniform(-500e3, 500e3)
        spec = BurstSpec(eps, freq_offset=df, gain=np.exp(2j * np.pi * rng.uniform()),
                         guard_before=500, guard_after=500)
        noisy = synthesize_burst(spec, DOWNLINK.noise_variance(snr), int(rng.integers(2**31)))
        errs.append(estimate_one(noisy, eps, event_at(noisy, eps, 500), grid).fine - df)
    rmse = np.sqrt(np.mean(np.square(errs)))
    bound = np.sqrt(mcrb_frequency(DOWNLINK.symbol_period, DOWNLINK.observed_symbols, snr))
    print(f"{snr_db:>6d} {rmse:>9.0f} {bound:>15.0f} {rmse / bound:>7.2f}")
