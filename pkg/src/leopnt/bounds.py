"""Positioning accuracy bounds for Doppler positioning from one satellite pass.

Chain: link budget -> receiver SNR -> modified CRB on each frequency
measurement -> CRB on the receiver's horizontal position from the
Jacobian of the received frequencies with respect to longitude and
latitude.  Partials are taken in radians and rescaled to metres on the
sphere, so bounds come out as position standard deviations in metres.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .iq_io import Table
from .orbit_doppler import (
    SPEED_OF_LIGHT,
    OverflightScenario,
    ReceiverPosition,
    geodetic_to_ecef,
    satellite_state,
)
from .signal_model import DOWNLINK

BOLTZMANN = 1.380649e-23
MHZ_TO_HZ_DB = 60.0
FD_STEP = 1e-7
CHUNK = 1 << 15
MAX_CONDITION = 1e12


class DegenerateGeometry(ValueError):
    """The measurements do not constrain both horizontal coordinates."""


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def flux_density_per_hz(db_w_m2_mhz: float) -> float:
    """dB(W/m²/MHz) to W/m²/Hz."""
    return float(db_to_linear(db_w_m2_mhz - MHZ_TO_HZ_DB))


@dataclass(frozen=True)
class LinkBudget:
    flux_density: float
    carrier_wavelength: float
    rx_gain: float
    noise_temperature: float = 290.0
    boltzmann: float = BOLTZMANN

    def __post_init__(self):
        for name in ("flux_density", "carrier_wavelength", "rx_gain", "noise_temperature", "boltzmann"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_db(cls, flux_db_w_m2_mhz: float = -122.0, carrier_freq: float = 11.7e9,
                rx_gain_db: float = 8.0, noise_temperature: float = 290.0) -> "LinkBudget":
        return cls(
            flux_density=flux_density_per_hz(flux_db_w_m2_mhz),
            carrier_wavelength=SPEED_OF_LIGHT / carrier_freq,
            rx_gain=float(db_to_linear(rx_gain_db)),
            noise_temperature=noise_temperature,
        )


def snr_at_receiver(lb: LinkBudget) -> float:
    return lb.flux_density * lb.carrier_wavelength**2 * lb.rx_gain / (
        4 * np.pi * lb.boltzmann * lb.noise_temperature)


def mcrb_frequency(symbol_period: float, n_symbols: int, snr: float) -> float:
    """Lower bound on the variance (Hz²) of a carrier frequency estimate."""
    if symbol_period <= 0 or n_symbols <= 0 or snr <= 0:
        raise ValueError("symbol_period, n_symbols and snr must be positive")
    return 3.0 / (symbol_period**2 * 2 * np.pi * float(n_symbols) ** 3 * snr)


@dataclass(frozen=True)
class MeasurementSchedule:
    """One measurement every ``stride`` frames, symmetric about ``time_offset``."""

    tracking_span: float
    frame_period: float = 1 / 750
    stride: int = 1
    time_offset: float = 0.0

    @property
    def spacing(self) -> float:
        return self.frame_period * self.stride

    @property
    def n(self) -> int:
        return int(round(self.tracking_span / self.spacing))

    def indices(self, start: int = 0, stop: int = None) -> np.ndarray:
        stop = self.n if stop is None else min(stop, self.n)
        return np.arange(start, stop) - (self.n - 1) / 2

    @property
    def times(self) -> np.ndarray:
        return self.time_offset + self.indices() * self.spacing

    def chunks(self, size: int = CHUNK):
        for start in range(0, self.n, size):
            yield self.time_offset + self.indices(start, start + size) * self.spacing


def _as_receiver(rx, scn: OverflightScenario) -> ReceiverPosition:
    if isinstance(rx, ReceiverPosition):
        return rx
    lon, lat, *alt = rx
    return ReceiverPosition.from_geodetic(lon, lat, alt[0] if alt else 0.0, scn.earth_radius)


def _range_rate(pos, vel, rx_xyz):
    los = pos - rx_xyz
    return np.einsum("...i,...i->...", los, vel) / np.linalg.norm(los, axis=-1)


def _jacobian_block(scn, rx: ReceiverPosition, t, step):
    """∂f/∂lon, ∂f/∂lat (Hz/rad) at times ``t`` by central differences.

    Differencing the range rate rather than the absolute frequency avoids
    cancelling against the 10 GHz carrier.
    """
    pos, vel = satellite_state(scn, t)
    lon, lat, alt = rx.longitude, rx.latitude, rx.altitude
    scale = -scn.carrier_freq / SPEED_OF_LIGHT / (2 * step)
    cols = []
    for dlon, dlat in ((step, 0.0), (0.0, step)):
        plus = geodetic_to_ecef(lon + dlon, lat + dlat, alt, scn.earth_radius)
        minus = geodetic_to_ecef(lon - dlon, lat - dlat, alt, scn.earth_radius)
        cols.append(scale * (_range_rate(pos, vel, plus) - _range_rate(pos, vel, minus)))
    return np.column_stack(cols)


def metric_scale(rx: ReceiverPosition) -> np.ndarray:
    """Metres per radian of longitude and latitude at the receiver."""
    r = rx.earth_radius + rx.altitude
    return np.array([r * np.cos(rx.latitude), r])


def _check_rank(info: np.ndarray):
    eig = np.linalg.eigvalsh(info)
    if eig[-1] <= 0 or eig[0] <= eig[-1] / MAX_CONDITION:
        raise DegenerateGeometry(
            "measurements do not constrain both coordinates "
            f"(information eigenvalues {eig[0]:.3g}, {eig[-1]:.3g})"
        )


def jacobian(scn: OverflightScenario, rx, sched: MeasurementSchedule, step: float = FD_STEP,
             check: bool = True) -> np.ndarray:
    """N×2 matrix of received-frequency partials w.r.t. longitude and latitude (Hz/rad).

    ``rx`` is a :class:`ReceiverPosition` or a ``(longitude, latitude[, altitude])``
    tuple in radians and metres.
    """
    rx = _as_receiver(rx, scn)
    if sched.n < 2:
        raise ValueError("need at least two measurements")
    H = _jacobian_block(scn, rx, sched.times, step)
    if check:
        _check_rank((H / metric_scale(rx)).T @ (H / metric_scale(rx)))
    return H


def information(scn: OverflightScenario, rx, sched: MeasurementSchedule, step: float = FD_STEP,
                chunk: int = CHUNK) -> np.ndarray:
    """HᵀH in 1/m² units (per Hz² of measurement variance), accumulated chunk by chunk."""
    rx = _as_receiver(rx, scn)
    scale = metric_scale(rx)
    info = np.zeros((2, 2))
    for t in sched.chunks(chunk):
        Hm = _jacobian_block(scn, rx, t, step) / scale
        info += Hm.T @ Hm
    return info


def crb_from_information(sigma2: float, info: np.ndarray) -> float:
    _check_rank(info)
    return float(sigma2 * np.trace(np.linalg.inv(info)))


def positioning_crb(sigma2: float, H: np.ndarray, rx: ReceiverPosition = None) -> float:
    """σ²·tr((HᵀH)⁻¹).

    With ``rx`` the columns of ``H`` are taken as per-radian partials and
    converted to per-metre before the trace, giving m².  Without it ``H``
    is used as given.
    """
    H = np.asarray(H, dtype=float)
    if rx is not None:
        H = H / metric_scale(rx)
    return crb_from_information(sigma2, H.T @ H)


def positioning_bound(scn: OverflightScenario, rx, sched: MeasurementSchedule, sigma2: float) -> float:
    """Position standard deviation bound in metres."""
    return float(np.sqrt(crb_from_information(sigma2, information(scn, rx, sched))))


@dataclass(frozen=True, eq=False)
class AccuracyMap(Table):
    pass


def accuracy_map(
    scn: OverflightScenario,
    distances,
    rx_gains_db=(8.0,),
    tracking_spans=(240.0,),
    flux_db_w_m2_mhz: float = -122.0,
    noise_temperature: float = 290.0,
    symbol_period: float = DOWNLINK.symbol_period,
    n_symbols: int = DOWNLINK.observed_symbols,
    frame_period: float = DOWNLINK.frame_period,
    stride: int = 1,
) -> AccuracyMap:
    """Bound versus cross-track distance for every receiver gain and tracking span.

    Rows are ``(cross_track_m, rx_gain_db, tracking_span_s, bound_m)``.  A
    cell whose geometry is degenerate reports an infinite bound.
    """
    distances = np.atleast_1d(np.asarray(distances, dtype=float))
    gains = np.atleast_1d(np.asarray(rx_gains_db, dtype=float))
    spans = np.atleast_1d(np.asarray(tracking_spans, dtype=float))
    if not (distances.size and gains.size and spans.size):
        raise ValueError("grids must be nonempty")
    rows = []
    for span in spans:
        sched = MeasurementSchedule(span, frame_period, stride)
        infos = []
        for d in distances:
            rx = ReceiverPosition(cross_track=d, earth_radius=scn.earth_radius)
            infos.append(information(scn, rx, sched))
        for g in gains:
            lb = LinkBudget.from_db(flux_db_w_m2_mhz, scn.carrier_freq, g, noise_temperature)
            sigma2 = mcrb_frequency(symbol_period, n_symbols, snr_at_receiver(lb))
            for d, info in zip(distances, infos):
                try:
                    bound = np.sqrt(crb_from_information(sigma2, info))
                except DegenerateGeometry:
                    bound = np.inf
                rows.append((d, g, span, bound))
    return AccuracyMap(("cross_track_m", "rx_gain_db", "tracking_span_s", "bound_m"), np.array(rows))
