import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leopnt.detector import (
    DEFAULT_THRESHOLD,
    CorrelationSeries,
    DetectionStatistic,
    correlate,
    correlate_direct,
    detect_bursts,
    detection_statistic,
    partial_correlations,
    xcorr_normalized,
)
from leopnt.signal_model import (
    UPLINK,
    BurstSpec,
    IqSignal,
    bri_starts,
    complex_noise,
    synthesize_burst,
    synthesize_train,
)

FS = UPLINK.sample_rate


def dirichlet(df, length, fs=FS):
    """|sum_n exp(j2π df n / fs)| / length for n < length."""
    x = np.pi * df / fs
    return abs(np.sin(length * x) / (length * np.sin(x))) if df else 1.0


def brute_correlation(x, h, lags):
    out = []
    for lag in lags:
        acc = 0j
        for n in range(len(x)):
            if 0 <= n - lag < len(h):
                acc += x[n] * np.conj(h[n - lag])
        out.append(acc)
    return np.array(out)


def burst(eps, df=0.0, m=3000, data=3000, tail=2000, gain=1.0, nv=0.0, seed=0):
    spec = BurstSpec(eps, data_len=data, freq_offset=df, gain=gain, guard_before=m, guard_after=tail)
    return synthesize_burst(spec, nv, seed)


class TestCorrelate:
    def test_brute_force_small(self, rng):
        x = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        h = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        lags = range(-6, 40)
        expected = brute_correlation(x, h, lags)
        np.testing.assert_allclose(correlate(x, h, -6, 40), expected, atol=1e-12)
        np.testing.assert_allclose(correlate_direct(x, h, -6, 40), expected, atol=1e-12)

    def test_fast_matches_direct(self, rng):
        x = rng.standard_normal(10_000) + 1j * rng.standard_normal(10_000)
        h = rng.standard_normal(300) + 1j * rng.standard_normal(300)
        fast = correlate(x, h, -299, 10_000)
        direct = correlate_direct(x, h, -299, 10_000)
        assert np.max(np.abs(fast - direct)) <= 1e-9 * np.max(np.abs(direct))

    def test_multi_block(self, rng):
        x = rng.standard_normal(300_000) + 1j * rng.standard_normal(300_000)
        h = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        fast = correlate(x, h, 0, x.size - 49)
        direct = np.correlate(x, h, "valid")
        assert np.max(np.abs(fast - direct)) <= 1e-9 * np.max(np.abs(direct))


class TestXcorrNormalized:
    def test_self_peak(self, rng):
        y = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        y1 = IqSignal(np.concatenate([np.zeros(1234), y, np.zeros(321)]), 1.0)
        r = xcorr_normalized(y1, IqSignal(y, 1.0))
        assert r.peak_lag() == 1234
        assert abs(r.at(1234)) == pytest.approx(1.0, abs=1e-12)

    def test_bounded(self, rng):
        y1 = IqSignal(rng.standard_normal(3000) + 1j * rng.standard_normal(3000), 1.0)
        y2 = IqSignal(rng.standard_normal(200) + 1j * rng.standard_normal(200), 1.0)
        r = xcorr_normalized(y1, y2)
        assert np.max(np.abs(r.values)) <= 1 + 1e-9
        assert r.lag_origin == -199 and len(r) == 3000 + 199

    @pytest.mark.parametrize("frac", [0.02, 0.05, 0.1])
    def test_dirichlet(self, uplink_eps, frac):
        df = frac * FS / uplink_eps.subseq_len
        sig = burst(uplink_eps, df)
        r = xcorr_normalized(sig, uplink_eps.to_signal())
        assert abs(r.at(3000)) == pytest.approx(dirichlet(df, uplink_eps.total_len), abs=1e-9)

    def test_rejects(self):
        a = IqSignal(np.ones(10), 1.0)
        with pytest.raises(ValueError):
            xcorr_normalized(a, IqSignal(np.ones(10), 1.0))
        with pytest.raises(ValueError):
            xcorr_normalized(a, IqSignal(np.zeros(3), 1.0))
        with pytest.raises(ValueError):
            xcorr_normalized(a, IqSignal(np.ones(3), 2.0))


class TestPartialCorrelations:
    def test_aligned_equal(self, uplink_eps):
        d = partial_correlations(burst(uplink_eps), uplink_eps, (3000, 3001))[:, 0]
        np.testing.assert_allclose(np.abs(d), uplink_eps.subseq_energy, rtol=1e-9)
        np.testing.assert_allclose(np.angle(d), 0.0, atol=1e-9)

    @pytest.mark.parametrize("df", [12e3, -80e3, 200e3])
    def test_phase_ramp(self, uplink_eps, df):
        d = partial_correlations(burst(uplink_eps, df), uplink_eps, (3000, 3001))[:, 0]
        expected = -2 * np.pi * df * uplink_eps.subseq_len / FS
        steps = np.angle(d[:-1] * np.conj(d[1:]))
        np.testing.assert_allclose(np.angle(np.exp(1j * (steps - expected))), 0.0, atol=1e-9)

    def test_block_path_matches_direct(self, uplink_eps, rng):
        s = burst(uplink_eps, 33e3, nv=1.0, seed=4)
        d = partial_correlations(s, uplink_eps)
        stat = detection_statistic(s, uplink_eps)
        for lag in (0, 2999, 3000, 4711, len(s) - uplink_eps.total_len):
            np.testing.assert_allclose(d[:, lag], stat.partials_at(lag), rtol=1e-9, atol=1e-6)

    def test_overhang_zero_padded(self, uplink_eps):
        s = burst(uplink_eps, m=0, data=0, tail=0)
        d = partial_correlations(s, uplink_eps, (-5, 5))
        assert d.shape == (8, 10)
        assert np.abs(d[:, 5]).min() == pytest.approx(uplink_eps.subseq_energy)

    def test_noise_statistics(self, uplink_eps):
        nv = 3.0
        rng = np.random.default_rng(1)
        powers = []
        for _ in range(100):
            s = IqSignal(complex_noise(rng, uplink_eps.total_len + 20, nv), FS)
            powers.append(np.abs(partial_correlations(s, uplink_eps, (0, 20))) ** 2)
        expected = nv * uplink_eps.subseq_energy
        assert np.mean(powers) == pytest.approx(expected, rel=0.2)

    def test_rejects_short(self, uplink_eps):
        with pytest.raises(ValueError):
            partial_correlations(IqSignal(np.ones(100), FS), uplink_eps)


class TestDetectionStatistic:
    def test_aligned_is_one(self, uplink_eps):
        stat = detection_statistic(burst(uplink_eps), uplink_eps)
        assert stat.peak_lag() == 3000
        assert stat.at(3000) == pytest.approx(1.0, abs=1e-6)

    def test_cfo_robustness(self, uplink_eps):
        df = 0.1 * FS / uplink_eps.subseq_len
        s = burst(uplink_eps, df)
        d_peak = detection_statistic(s, uplink_eps).at(3000)
        r_peak = abs(xcorr_normalized(s, uplink_eps.to_signal()).at(3000))
        assert d_peak >= 0.96
        assert d_peak == pytest.approx(dirichlet(df, uplink_eps.subseq_len), abs=1e-6)
        assert r_peak == pytest.approx(dirichlet(df, uplink_eps.total_len), abs=1e-6)

    @given(st.floats(1e-3, 0.3))
    @settings(max_examples=15, deadline=None)
    def test_robustness_ordering(self, frac):
        eps = UPLINK.sync_sequence(1)
        df = frac * FS / eps.subseq_len
        s = burst(eps, df, m=500, data=500, tail=500)
        ref = burst(eps, 0.0, m=500, data=500, tail=500)
        rep = eps.to_signal()
        d_ratio = detection_statistic(s, eps).at(500) / detection_statistic(ref, eps).at(500)
        r_ratio = np.max(np.abs(xcorr_normalized(s, rep).values)) / np.max(np.abs(xcorr_normalized(ref, rep).values))
        assert d_ratio >= r_ratio

    def test_bounded_and_gain_invariant(self, uplink_eps):
        s = burst(uplink_eps, 40e3, nv=0.5, seed=2)
        a = detection_statistic(s, uplink_eps)
        b = detection_statistic(IqSignal(s.samples * (3 - 4j), FS), uplink_eps)
        assert a.values.min() >= 0 and a.values.max() <= 1 + 1e-9
        np.testing.assert_allclose(a.values, b.values, atol=1e-9)

    def test_low_snr_peak(self, uplink_eps):
        s = burst(uplink_eps, 20e3, m=40_000, data=20_000, tail=40_000, nv=100.0, seed=6)
        stat = detection_statistic(s, uplink_eps)
        assert stat.peak_lag() == 40_000
        noise = np.concatenate([stat.values[:30_000], stat.values[-10_000:]])
        assert stat.at(40_000) > noise.mean() + 6 * noise.std()

    def test_rejects_zero_representative(self, uplink_eps):
        from leopnt.signal_model import build_sync_sequence
        zero = build_sync_sequence(np.zeros(10), 0, sample_rate=FS)
        with pytest.raises(ValueError, match="zero energy"):
            detection_statistic(burst(uplink_eps), zero)

    def test_complex64_path(self, uplink_eps):
        s = burst(uplink_eps, 10e3, nv=1.0)
        a = detection_statistic(s, uplink_eps)
        b = detection_statistic(IqSignal(s.samples.astype(np.complex64), FS), uplink_eps)
        assert b.values.dtype == np.float32
        np.testing.assert_allclose(a.values, b.values, atol=1e-5)


class TestDetectBursts:
    def test_bri_train(self, uplink_eps):
        starts = bri_starts(5, UPLINK.bri_set[0], FS, first=50_000)
        sig = synthesize_train(uplink_eps, starts, starts[-1] + 100_000, data_len=20_000,
                               freq_offsets=[0, 30e3, -30e3, 60e3, -100e3])
        events = detect_bursts(detection_statistic(sig, uplink_eps))
        assert [e.sample_index for e in events] == starts
        for e in events:
            assert e.recompute_statistic() == pytest.approx(e.statistic, rel=1e-5)
            assert not e.low_confidence

    def test_close_bursts_merge(self, uplink_eps):
        sig = synthesize_train(uplink_eps, [10_000, 22_000], 60_000, freq_offsets=[0, 150e3],
                               dtype=np.complex128)
        stat = detection_statistic(sig, uplink_eps)
        events = detect_bursts(stat, 0.5, window=30_000)
        assert [e.sample_index for e in events] == [10_000]

    def test_tie_goes_to_smaller_index(self):
        values = np.zeros(1000)
        values[[400, 450]] = 0.8
        stat = DetectionStatistic(values, 0, True, signal=IqSignal(np.zeros(1000), 1.0),
                                  sync=_tiny_sync(), norm=1.0)
        events = detect_bursts(stat, 0.5, window=200)
        assert [e.sample_index for e in events] == [400]

    @pytest.mark.slow
    def test_noise_false_alarms(self, uplink_eps):
        rng = np.random.default_rng(2024)
        clean_05 = clean_default = 0
        for _ in range(100):
            s = IqSignal(complex_noise(rng, 10**6, 1.0, np.complex64), FS)
            stat = detection_statistic(s, uplink_eps)
            clean_05 += not detect_bursts(stat, 0.5)
            clean_default += not detect_bursts(stat, DEFAULT_THRESHOLD)
        assert clean_05 >= 99
        assert clean_default >= 99

    def test_shift_equivariance(self, uplink_eps):
        sig = synthesize_train(uplink_eps, [20_000, 80_000], 130_000, noise_variance=10.0, seed=3,
                               data_len=10_000, freq_offsets=[5e3, -40e3])
        pre = complex_noise(np.random.default_rng(8), 777, 10.0, np.complex64)
        shifted = IqSignal(np.concatenate([pre, sig.samples]), FS)
        a = detect_bursts(detection_statistic(sig, uplink_eps))
        b = detect_bursts(detection_statistic(shifted, uplink_eps))
        assert [e.sample_index + 777 for e in a] == [e.sample_index for e in b]

    def test_edge_flag(self, uplink_eps):
        sig = synthesize_train(uplink_eps, [100], 30_000, dtype=np.complex128)
        (event,) = detect_bursts(detection_statistic(sig, uplink_eps), 0.5)
        assert event.low_confidence

    @pytest.mark.parametrize("threshold, window", [(0.0, None), (1.0, None), (0.5, 100)])
    def test_rejects(self, uplink_eps, threshold, window):
        stat = detection_statistic(burst(uplink_eps), uplink_eps)
        with pytest.raises(ValueError):
            detect_bursts(stat, threshold, window)


def _tiny_sync():
    from leopnt.signal_model import build_sync_sequence
    return build_sync_sequence(np.ones(10), 0, sample_rate=1.0)


def test_series_helpers():
    s = CorrelationSeries(np.array([0.1, -0.9, 0.3]), lag_origin=-1)
    assert list(s.lags) == [-1, 0, 1]
    assert s.peak_lag() == 0 and s.at(1) == 0.3
