"""Received carrier frequency during a single zenith pass.

Non-rotating spherical earth, circular Keplerian orbit.  The orbit lies in
the equatorial plane, so the ground track is the equator: along-track
distance maps to longitude and cross-track distance to latitude.  At the
closest-approach time the sub-satellite point is (0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .iq_io import Table

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class OverflightScenario:
    orbit_height: float = 550e3
    carrier_freq: float = 11.7e9
    earth_radius: float = 6_371_000.0
    gravitational_parameter: float = 3.986004418e14
    closest_approach_time: float = 0.0

    def __post_init__(self):
        if not self.orbit_height > 0:
            raise ValueError("orbit_height must be positive")
        if not self.carrier_freq > 0:
            raise ValueError("carrier_freq must be positive")

    @property
    def orbit_radius(self) -> float:
        return self.earth_radius + self.orbit_height

    @property
    def angular_rate(self) -> float:
        return np.sqrt(self.gravitational_parameter / self.orbit_radius**3)

    @property
    def speed(self) -> float:
        return np.sqrt(self.gravitational_parameter / self.orbit_radius)

    @property
    def period(self) -> float:
        return 2 * np.pi * np.sqrt(self.orbit_radius**3 / self.gravitational_parameter)


@dataclass(frozen=True)
class ReceiverPosition:
    """Static receiver, distances measured along the ground in metres."""

    along_track: float = 0.0
    cross_track: float = 0.0
    altitude: float = 0.0
    earth_radius: float = 6_371_000.0

    def __post_init__(self):
        if abs(self.cross_track) >= np.pi * self.earth_radius / 2:
            raise ValueError("cross-track distance must stay within a quarter circumference")

    @classmethod
    def from_geodetic(cls, longitude: float, latitude: float, altitude: float = 0.0,
                      earth_radius: float = 6_371_000.0) -> "ReceiverPosition":
        return cls(longitude * earth_radius, latitude * earth_radius, altitude, earth_radius)

    @property
    def longitude(self) -> float:
        return self.along_track / self.earth_radius

    @property
    def latitude(self) -> float:
        return self.cross_track / self.earth_radius

    def ecef(self) -> np.ndarray:
        return geodetic_to_ecef(self.longitude, self.latitude, self.altitude, self.earth_radius)


def geodetic_to_ecef(longitude, latitude, altitude, earth_radius):
    """Cartesian position on the sphere; broadcasts over array inputs."""
    lon, lat, alt = np.broadcast_arrays(
        np.asarray(longitude, dtype=float),
        np.asarray(latitude, dtype=float),
        np.asarray(altitude, dtype=float),
    )
    r = earth_radius + alt
    return np.stack([r * np.cos(lat) * np.cos(lon),
                     r * np.cos(lat) * np.sin(lon),
                     r * np.sin(lat)], axis=-1)


def satellite_state(scn: OverflightScenario, t):
    """Position and velocity (m, m/s) at time(s) ``t``; arrays of shape (..., 3)."""
    theta = scn.angular_rate * (np.asarray(t, dtype=float) - scn.closest_approach_time)
    a = scn.orbit_radius
    v = scn.speed
    zeros = np.zeros_like(theta)
    pos = np.stack([a * np.cos(theta), a * np.sin(theta), zeros], axis=-1)
    vel = np.stack([-v * np.sin(theta), v * np.cos(theta), zeros], axis=-1)
    return pos, vel


def range_and_rate(scn: OverflightScenario, rx_xyz, t):
    pos, vel = satellite_state(scn, t)
    los = pos - np.asarray(rx_xyz, dtype=float)
    rng = np.linalg.norm(los, axis=-1)
    if np.any(rng == 0):
        raise ValueError("receiver coincides with the satellite")
    rate = np.einsum("...i,...i->...", los, vel) / rng
    return rng, rate


def frequency_at(scn: OverflightScenario, rx_xyz, t):
    """First-order Doppler for a receiver given in Cartesian coordinates."""
    _, rate = range_and_rate(scn, rx_xyz, t)
    return scn.carrier_freq * (1.0 - rate / SPEED_OF_LIGHT)


def received_frequency(scn: OverflightScenario, rx: ReceiverPosition, t):
    return frequency_at(scn, rx.ecef(), t)


def doppler_shift(scn: OverflightScenario, rx: ReceiverPosition, t):
    """f_r - f_c computed without the carrier.

    Subtracting the carrier from :func:`received_frequency` loses a few
    µHz to float64 rounding at 10 GHz; this form keeps full precision.
    """
    _, rate = range_and_rate(scn, rx.ecef(), t)
    return -scn.carrier_freq * rate / SPEED_OF_LIGHT


def doppler_curve(scn: OverflightScenario, cross_track_list, time_grid) -> Table:
    """Received frequency for every (cross-track distance, time) pair, row-major."""
    xs = np.atleast_1d(np.asarray(cross_track_list, dtype=float))
    ts = np.atleast_1d(np.asarray(time_grid, dtype=float))
    if xs.size == 0 or ts.size == 0:
        raise ValueError("grids must be nonempty")
    rows = []
    for x in xs:
        rx = ReceiverPosition(cross_track=x, earth_radius=scn.earth_radius)
        f = received_frequency(scn, rx, ts)
        rows.append(np.column_stack([np.full_like(ts, x), ts, f]))
    return Table(("cross_track_m", "time_s", "frequency_hz"), np.vstack(rows))
