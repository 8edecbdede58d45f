"""
Doppler during a zenith pass
============================

Received frequency against time for receivers at several distances from
the ground track of a 550 km circular orbit.
"""

import numpy as np

from leopnt.orbit_doppler import OverflightScenario, ReceiverPosition, doppler_shift

scn = OverflightScenario()
print(f"orbital speed {scn.speed:.0f} m/s, period {scn.period / 60:.1f} min")

t = np.arange(-300.0, 301.0, 1.0)
for xc_km in (0, 200, 400, 800):
    shift = doppler_shift(scn, ReceiverPosition(cross_track=xc_km * 1e3), t)
    slope = np.max(np.abs(np.diff(shift)))
    # Flatter S-curves further from the track
    print(f"{xc_km:>4d} km: {shift[0] / 1e3:+8.1f} kHz -> {shift[-1] / 1e3:+8.1f} kHz, "
          f"steepest {slope / 1e3:.2f} kHz/s")
