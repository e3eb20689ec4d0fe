"""Counting statistics: rates, dead time, multiplexing, Monte Carlo check.

Starts from the measured operating point (0.56 Mpairs/s/mW detected with a
21% pair-to-singles ratio), projects it to a 1 W pump, and shows why the
accidental-coincidence rate forces the detection into many wavelength
channels.  A timestamp-level Monte Carlo verifies the closed forms.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from dataclasses import replace

from pairsource import (
    CountingScenario,
    accidental_rate,
    count_coincidences,
    detected_rates,
    multiplex_summary,
    simulate_event_streams,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# measured operating point, scaled to 1 W
scenario = CountingScenario.from_brightness(
    0.56e6, 1000.0, 0.21, 0.21, coincidence_window_s=1e-9, dead_time_s=50e-9,
)
rates = detected_rates(scenario)
print(f"generated pairs at 1 W: {scenario.generated_pair_rate:.3e} /s")
print(f"detected coincidences:  {rates.coincidences:.3e} /s "
      f"(pair-to-singles {rates.pair_to_singles_signal:.0%})")

channels = np.unique(np.logspace(0, 9, 40, base=2).astype(int))
car, observed = [], []
for n in channels:
    s = multiplex_summary(replace(scenario, channels=int(n)))
    car.append(s.car_total)
    observed.append(s.per_channel.observed_singles_signal)

fig, ax1 = plt.subplots(figsize=(7, 4.5))
ax1.loglog(channels, car, "k.-", label="total CAR")
ax1.axhline(10, color="gray", ls=":", label="CAR = 10")
ax1.set_xlabel("wavelength channels N")
ax1.set_ylabel("coincidence-to-accidental ratio")
ax2 = ax1.twinx()
ax2.loglog(channels, np.array(observed) / 1e6, "r.-", label="observed Mcps/detector")
ax2.axhline(10, color="r", ls=":", alpha=0.5)
ax2.set_ylabel("observed singles per detector (Mcps)", color="r")
ax1.legend(loc="center left", fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "06_multiplexing.png", dpi=150)

for n in range(1, 600):
    s = multiplex_summary(replace(scenario, channels=n))
    if s.per_channel.observed_singles_signal <= 10e6 and s.car_total >= 10.0:
        print(f"smallest N with <= 10 Mcps/detector (50 ns dead time) and CAR >= 10: {n}")
        break

# Monte Carlo cross-check at desk scale
sc = CountingScenario(5e5, 0.21, 0.21, coincidence_window_s=1e-9)
streams = simulate_event_streams(sc, 20.0, seed=123)
counted, _ = count_coincidences(streams, sc.coincidence_window_s)
expected = detected_rates(sc).coincidences * 20.0
acc = accidental_rate(5e5 * 0.21, 5e5 * 0.21, 1e-9) * 20.0
print(f"Monte Carlo: {counted} coincidences vs {expected:.0f} expected "
      f"(+{acc:.0f} accidentals), {abs(counted - expected) / np.sqrt(expected):.1f} sigma")
print(f"figures in {OUT}")
