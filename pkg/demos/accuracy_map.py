"""
How well one pass can position a receiver
=========================================

Bound on horizontal position error against cross-track distance, for
several receiver gains and tracking spans.
"""

import numpy as np

from leopnt.bounds import LinkBudget, accuracy_map, linear_to_db, snr_at_receiver
from leopnt.orbit_doppler import OverflightScenario

snr = snr_at_receiver(LinkBudget.from_db())
print(f"receiver SNR at 8 dB gain: {linear_to_db(snr):.2f} dB")

scn = OverflightScenario()
distances = np.array([25e3, 50e3, 100e3, 200e3, 400e3, 700e3, 1000e3])

# Every 10th frame keeps this quick; bounds scale by sqrt(10)
by_gain = accuracy_map(scn, distances, rx_gains_db=[0, 4, 8, 12], stride=10)
by_span = accuracy_map(scn, distances, tracking_spans=[60, 120, 240, 480], stride=10)

print("\ndistance km " + "".join(f"{g:>9.0f} dB" for g in (0, 4, 8, 12)))
for i, d in enumerate(distances):
    row = by_gain.column("bound_m")[i::len(distances)]
    print(f"{d / 1e3:>11.0f} " + "".join(f"{b:>10.0f} m" for b in row))

print("\ndistance km " + "".join(f"{s:>8.0f} min" for s in (1, 2, 4, 8)))
for i, d in enumerate(distances):
    row = by_span.column("bound_m")[i::len(distances)]
    print(f"{d / 1e3:>11.0f} " + "".join(f"{b:>10.0f} m" for b in row))
