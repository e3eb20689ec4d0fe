"""Joint spectrum of the broadband-pumped source.

Builds the two-photon intensity for a multimode diode comb centered on the
degenerate turning point, compares the marginal against narrowband
(degenerate and split) operation, and reports widths and support.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pairsource import (
    CrystalSpec,
    PumpSpectrum,
    fwhm,
    joint_spectrum,
    make_pump_comb,
    marginal_spectrum,
    solve_degenerate_temperature,
    solve_temperature_for_signal,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

L_MM, PUMP_NM, PERIOD_UM = 10.0, 405.0, 3.425
t_deg = solve_degenerate_temperature(L_MM, PERIOD_UM, PUMP_NM)
crystal = CrystalSpec(L_MM, PERIOD_UM, t_deg)

broadband = make_pump_comb(PUMP_NM, 0.25, 0.05, n_modes=40)
js = joint_spectrum(crystal, broadband)
lam, marg = marginal_spectrum(js)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
extent = [js.grid_idler_nm[0], js.grid_idler_nm[-1], js.grid_signal_nm[0], js.grid_signal_nm[-1]]
ax1.imshow(js.intensity, origin="lower", extent=extent, aspect="auto", cmap="inferno")
ax1.set_xlabel("idler wavelength (nm)")
ax1.set_ylabel("signal wavelength (nm)")
ax1.set_title("broadband joint spectrum")

ax2.plot(lam, marg / marg.max(), "k", label="broadband comb")

# narrowband references: degenerate and 780/842 split
mono = PumpSpectrum.monochromatic(PUMP_NM)
lam_d, marg_d = marginal_spectrum(joint_spectrum(crystal, mono))
ax2.plot(lam_d, marg_d / marg_d.max(), "g", alpha=0.7, label="narrowband, degenerate")
t_split = solve_temperature_for_signal(L_MM, PERIOD_UM, PUMP_NM, 780.0)
lam_s, marg_s = marginal_spectrum(joint_spectrum(CrystalSpec(L_MM, PERIOD_UM, t_split), mono))
ax2.plot(lam_s, marg_s / marg_s.max(), "r", alpha=0.7, label="narrowband, 780/842")
ax2.set_xlabel("wavelength (nm)")
ax2.set_ylabel("relative intensity")
ax2.legend(fontsize=8)
ax2.set_title("marginal spectra")
fig.tight_layout()
fig.savefig(OUT / "03_joint_spectrum.png", dpi=150)

idx = np.flatnonzero(marg >= 0.01 * marg.max())
print(f"degenerate narrowband width: {fwhm(lam_d, marg_d):.1f} nm")
lobe = lam_s < 810
print(f"780 nm lobe width:           {fwhm(lam_s[lobe], marg_s[lobe]):.1f} nm")
print(f"broadband -20 dB support:    [{lam[idx[0]]:.1f}, {lam[idx[-1]]:.1f}] nm "
      f"({lam[idx[-1]] - lam[idx[0]]:.0f} nm wide)")
print(f"figures in {OUT}")
