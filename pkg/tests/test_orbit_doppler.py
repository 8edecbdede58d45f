import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from leopnt.orbit_doppler import (
    SPEED_OF_LIGHT,
    OverflightScenario,
    ReceiverPosition,
    doppler_curve,
    range_and_rate,
    doppler_shift,
    received_frequency,
    satellite_state,
)

SCN = OverflightScenario()
V_CIRC = np.sqrt(3.986004418e14 / 6.921e6)
T = np.linspace(-300, 300, 601)


class TestSatelliteState:
    def test_radius_at_zenith(self):
        pos, _ = satellite_state(SCN, 0.0)
        assert np.linalg.norm(pos) == pytest.approx(6_921_000.0, rel=1e-12)

    def test_speed_constant(self):
        _, vel = satellite_state(SCN, np.linspace(-3000, 3000, 101))
        np.testing.assert_allclose(np.linalg.norm(vel, axis=-1), V_CIRC, rtol=1e-9)
        assert V_CIRC == pytest.approx(7589, abs=1)

    def test_circular(self):
        pos, vel = satellite_state(SCN, np.linspace(-3000, 3000, 101))
        dots = np.einsum("ij,ij->i", pos, vel)
        assert np.max(np.abs(dots)) <= 1e-9 * 6.921e6 * V_CIRC

    def test_period(self):
        p0, v0 = satellite_state(SCN, 0.0)
        p1, v1 = satellite_state(SCN, SCN.period)
        np.testing.assert_allclose(p1, p0, atol=1e-9 * SCN.orbit_radius)
        assert SCN.period == pytest.approx(2 * np.pi * SCN.orbit_radius / V_CIRC, rel=1e-12)

    def test_velocity_is_derivative(self):
        h = 1e-3
        p_plus, _ = satellite_state(SCN, 10 + h)
        p_minus, _ = satellite_state(SCN, 10 - h)
        _, v = satellite_state(SCN, 10)
        np.testing.assert_allclose((p_plus - p_minus) / (2 * h), v, atol=1e-4)


class TestReceivedFrequency:
    def test_zenith(self):
        assert received_frequency(SCN, ReceiverPosition(), 0.0) == SCN.carrier_freq

    def test_odd_symmetry(self):
        dev = doppler_shift(SCN, ReceiverPosition(), T)
        np.testing.assert_allclose(dev, -dev[::-1], atol=1e-6)

    def test_shift_matches_frequency(self):
        rx = ReceiverPosition(100e3, 300e3)
        np.testing.assert_allclose(received_frequency(SCN, rx, T) - SCN.carrier_freq,
                                   doppler_shift(SCN, rx, T), atol=1e-5)

    @given(st.floats(-1.5e6, 1.5e6), st.floats(-2e6, 2e6), st.floats(-600, 600))
    @settings(max_examples=50, deadline=None)
    def test_velocity_bound(self, xc, xa, t):
        f = received_frequency(SCN, ReceiverPosition(xa, xc), t)
        assert abs(f - SCN.carrier_freq) <= SCN.carrier_freq * SCN.speed / SPEED_OF_LIGHT
        assert SCN.carrier_freq * SCN.speed / SPEED_OF_LIGHT == pytest.approx(296e3, rel=0.01)

    def test_monotone_on_ground_track(self):
        f = received_frequency(SCN, ReceiverPosition(), T)
        assert np.all(np.diff(f) < 0)

    def test_along_track_is_time_shift(self):
        xa = 250e3
        shift = xa / SCN.earth_radius / SCN.angular_rate
        for xc in (0.0, 300e3):
            a = received_frequency(SCN, ReceiverPosition(xa, xc), T + shift)
            b = received_frequency(SCN, ReceiverPosition(0.0, xc), T)
            np.testing.assert_allclose(a, b, atol=1e-6)

    def test_range_rate_matches_difference(self):
        rx = ReceiverPosition(120e3, 350e3).ecef()
        h = 1e-3
        t = np.linspace(-250, 250, 51)
        r_plus, _ = range_and_rate(SCN, rx, t + h)
        r_minus, _ = range_and_rate(SCN, rx, t - h)
        _, rate = range_and_rate(SCN, rx, t)
        assert np.max(np.abs((r_plus - r_minus) / (2 * h) - rate)) < 1e-4

    def test_coincident_rejected(self):
        rx = ReceiverPosition(altitude=SCN.orbit_height)
        with pytest.raises(ValueError):
            received_frequency(SCN, rx, 0.0)

    def test_receiver_validation(self):
        with pytest.raises(ValueError):
            ReceiverPosition(cross_track=1.1e7)
        rx = ReceiverPosition.from_geodetic(0.01, -0.02)
        assert rx.longitude == pytest.approx(0.01) and rx.latitude == pytest.approx(-0.02)


class TestDopplerCurve:
    def test_table(self):
        table = doppler_curve(SCN, [0.0, 200e3], T)
        assert table.columns == ("cross_track_m", "time_s", "frequency_hz")
        assert table.rows.shape == (2 * T.size, 3)
        zero = table.rows[(table.rows[:, 0] == 0) & (table.rows[:, 1] == 0)]
        assert zero[0, 2] == SCN.carrier_freq

    def test_slope_ordering(self):
        t = np.linspace(-300, 300, 6001)
        slopes = []
        for xc in (0.0, 200e3, 400e3, 800e3):
            f = received_frequency(SCN, ReceiverPosition(cross_track=xc), t)
            slopes.append(np.max(np.abs(np.diff(f) / np.diff(t))))
        assert all(a > b for a, b in zip(slopes, slopes[1:]))

    def test_mirror(self):
        a = doppler_curve(SCN, [350e3], T).column("frequency_hz")
        b = doppler_curve(SCN, [-350e3], T).column("frequency_hz")
        np.testing.assert_array_equal(a, b)

    def test_empty(self):
        with pytest.raises(ValueError):
            doppler_curve(SCN, [], T)
