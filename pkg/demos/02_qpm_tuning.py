"""Quasi-phase-matching: poling period, temperature tuning, pump tuning.

Solves the poling period that matches 405 nm -> 810 nm + 810 nm, then maps
how the emission pair moves with crystal temperature and how the collected
collinear rate behaves as the pump wavelength crosses the degenerate
turning point.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pairsource import (
    CrystalSpec,
    PumpSpectrum,
    collinear_rate_vs_pump,
    make_pump_comb,
    solve_degenerate_temperature,
    solve_phasematched_signal,
    solve_poling_period,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

L_MM, PUMP_NM = 10.0, 405.0

period = solve_poling_period(PUMP_NM, 2 * PUMP_NM, 25.0)
print(f"poling period for degenerate matching at 25 C: {period:.4f} um")

t_deg = solve_degenerate_temperature(L_MM, 3.425, PUMP_NM)
print(f"a 3.425 um grating is degenerate-matched at {t_deg:.2f} C")

# emission wavelengths vs temperature
temps = np.arange(t_deg - 1.0, t_deg + 12.0, 0.25)
pairs = []
for T in temps:
    sol = solve_phasematched_signal(CrystalSpec(L_MM, 3.425, T), PUMP_NM)
    pairs.append(sol if sol else (np.nan, np.nan))
pairs = np.array(pairs)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.plot(temps, pairs[:, 0], ".-", label="signal")
ax1.plot(temps, pairs[:, 1], ".-", label="idler")
ax1.axvline(t_deg, color="gray", ls=":", label="degenerate point")
ax1.set_xlabel("crystal temperature (C)")
ax1.set_ylabel("emission wavelength (nm)")
ax1.legend()
ax1.set_title("temperature tuning curve")

# collected rate vs pump wavelength: one-sided cutoff at the turning point
crystal = CrystalSpec(L_MM, 3.425, t_deg)
pump = make_pump_comb(PUMP_NM, 0.25, 0.02, n_modes=120)
rates = collinear_rate_vs_pump(crystal, pump)
lp = [x for x, _ in rates]
r = np.array([y for _, y in rates])
weights = pump.weights
ax2.plot(lp, r / r.max(), ".-", label="weighted collected rate")
ax2.plot(pump.wavelengths_nm, weights / weights.max(), alpha=0.4, label="pump envelope")
ax2.axvline(PUMP_NM, color="gray", ls=":")
ax2.set_xlabel("pump wavelength (nm)")
ax2.set_ylabel("relative rate")
ax2.legend(fontsize=8)
ax2.set_title("pump modes beyond the turning point emit non-collinearly")
fig.tight_layout()
fig.savefig(OUT / "02_qpm_tuning.png", dpi=150)
print(f"figures in {OUT}")
