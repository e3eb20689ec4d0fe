"""Crystal dispersion and beam-displacement geometry.

Walks through the shipped refractive-index models, shows the birefringence
of each crystal, and checks that the two 45-degree-cut BBO displacers give
the 1 mm lateral walk-off the interferometer is built around.

Run:  python demos/01_dispersion_and_walkoff.py
Writes plots into demos/output/.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pairsource import get_material, index_at_angle, refractive_index, walkoff_angle

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

lam = np.linspace(400.0, 900.0, 400)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for name, style in (("ktp_z", "k-"), ("bbo_o", "b-"), ("bbo_e", "b--"),
                    ("yvo4_o", "r-"), ("yvo4_e", "r--")):
    ax1.plot(lam, refractive_index(get_material(name), lam), style, label=name)
ax1.set_xlabel("wavelength (nm)")
ax1.set_ylabel("refractive index")
ax1.legend(fontsize=8)
ax1.set_title("shipped dispersion models")

# birefringence seen by the walking ray in a 45-degree displacer
n_o = refractive_index(get_material("bbo_o"), lam)
n_e = refractive_index(get_material("bbo_e"), lam)
ax2.plot(lam, n_o - index_at_angle(n_o, n_e, 45.0), label="BBO, 45 deg cut")
y_o = refractive_index(get_material("yvo4_o"), lam)
y_e = refractive_index(get_material("yvo4_e"), lam)
ax2.plot(lam, y_e - y_o, label="YVO4, a-cut")
ax2.set_xlabel("wavelength (nm)")
ax2.set_ylabel("slow - fast index")
ax2.legend(fontsize=8)
ax2.set_title("retardation per unit length")
fig.tight_layout()
fig.savefig(OUT / "01_dispersion.png", dpi=150)

# walk-off geometry of the two displacement crystals
for label, length_mm, lam_nm in (("displacer", 13.0, 405.0), ("combiner", 13.76, 810.0)):
    no = refractive_index(get_material("bbo_o"), lam_nm)
    ne = refractive_index(get_material("bbo_e"), lam_nm)
    rho = walkoff_angle(no, ne, 45.0)
    print(f"{label}: {length_mm} mm BBO at {lam_nm:.0f} nm -> "
          f"walk-off {np.degrees(rho):.2f} deg, displacement {length_mm * np.tan(rho):.3f} mm")

# where is walk-off maximal?
thetas = np.linspace(1, 89, 300)
rho = walkoff_angle(no, ne, thetas)
print(f"walk-off peaks at {thetas[np.argmax(rho)]:.1f} deg cut angle")
print(f"figures in {OUT}")
