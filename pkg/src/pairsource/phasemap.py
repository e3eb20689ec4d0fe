"""Interferometric phase of the beam-displacement layout and its compensation.

The two-photon phase difference between the VV and HH amplitudes is a sum
over birefringent elements: pump-acting elements evaluated at the pump
wavelength fixed by energy conservation of each (signal, idler) cell,
photon-acting elements evaluated at the signal and at the idler wavelength.
The sign bookkeeping lives in each element's ``arm_sign``; in the shipped
layout the displacer's walked ray belongs to the VV arm (arm_sign -1 for
slow-minus-fast retardation) and the combiner's walked ray to the HH arm
(arm_sign +1), which is the geometry of two identically oriented walk-off
crystals with the recombined beam on the displaced axis.

Compensator slots are the a-cut elements (cut angle 90 deg: full
birefringence, no walk-off).  ``optimize_compensators`` flattens the phase
over a joint spectrum by maximizing the spectrally averaged fringe
contrast, which is the quantity a correlation measurement in the
diagonal basis sees.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .dispersion import birefringent_phase
from .spdc import CrystalSpec, JointSpectrum, PumpSpectrum, default_grid

__all__ = [
    "OpticalLayout",
    "PhaseMap",
    "CompensatorFit",
    "GridMismatchError",
    "FlatObjectiveWarning",
    "total_phase",
    "phase_map",
    "visibility",
    "optimize_compensators",
]

COMPENSATOR_CUT_DEG = 90.0


class GridMismatchError(ValueError):
    """Joint spectrum and phase map were sampled on different grids."""


class FlatObjectiveWarning(UserWarning):
    """The visibility objective barely varies over the search bounds."""


@dataclass
class OpticalLayout:
    """Ordered birefringent elements around a down-conversion crystal."""

    elements: list
    crystal: CrystalSpec
    pump: PumpSpectrum

    def pump_elements(self):
        return [e for e in self.elements if e.acts_on == "pump"]

    def photon_elements(self):
        return [e for e in self.elements if e.acts_on == "signal_and_idler"]

    def compensator_slots(self):
        """(pump-acting, photon-acting) a-cut slots; exactly one of each required."""
        pre = [e for e in self.pump_elements() if e.cut_angle_deg == COMPENSATOR_CUT_DEG]
        post = [e for e in self.photon_elements() if e.cut_angle_deg == COMPENSATOR_CUT_DEG]
        if len(pre) != 1 or len(post) != 1:
            raise ValueError(
                "layout must contain exactly one pump-acting and one photon-acting "
                f"a-cut compensator slot, found {len(pre)} and {len(post)}"
            )
        return pre[0], post[0]


@dataclass
class PhaseMap:
    """Unwrapped phase difference (radians) on a joint-spectrum grid."""

    grid_signal_nm: np.ndarray
    grid_idler_nm: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        if self.phase.shape != (len(self.grid_signal_nm), len(self.grid_idler_nm)):
            raise ValueError("phase shape does not match grid axes")

    def to_csv(self, fh):
        fh.write("signal_nm\\idler_nm," + ",".join(f"{x:.4f}" for x in self.grid_idler_nm) + "\n")
        for lam_s, row in zip(self.grid_signal_nm, self.phase):
            fh.write(f"{lam_s:.4f}," + ",".join(f"{v:.9e}" for v in row) + "\n")


@dataclass(frozen=True)
class CompensatorFit:
    """Optimizer output: best lengths (mm) and the visibility they reach."""

    length_pre_mm: float
    length_post_mm: float
    visibility: float


def _pump_wavelength(signal_nm, idler_nm):
    return 1.0 / (1.0 / np.asarray(signal_nm, dtype=float) + 1.0 / np.asarray(idler_nm, dtype=float))


def total_phase(layout: OpticalLayout, signal_nm, idler_nm):
    """VV-minus-HH phase at one (or a grid of) signal/idler wavelengths.

    Pump-acting elements are evaluated at the conjugate pump wavelength of
    the cell; photon-acting elements at the signal plus at the idler
    wavelength.  The periodically poled crystal is common to both arms and
    drops out.
    """
    lam_p = _pump_wavelength(signal_nm, idler_nm)
    T = layout.crystal.temperature_c
    phi = np.zeros(np.broadcast(np.asarray(signal_nm), np.asarray(idler_nm)).shape)
    for el in layout.elements:
        if el.length_mm == 0.0:
            continue
        if el.acts_on == "pump":
            phi = phi + birefringent_phase(el, lam_p, T)
        else:
            phi = phi + birefringent_phase(el, signal_nm, T) + birefringent_phase(el, idler_nm, T)
    return phi if phi.ndim else float(phi)


def phase_map(layout: OpticalLayout, grid_nm=None):
    """Sample ``total_phase`` on a grid (rows = signal, columns = idler)."""
    centers = default_grid() if grid_nm is None else np.asarray(grid_nm, dtype=float)
    lam_s = centers[:, None]
    lam_i = centers[None, :]
    phi = total_phase(layout, lam_s, lam_i)
    return PhaseMap(centers.copy(), centers.copy(), np.asarray(phi))


def visibility(js: JointSpectrum, pm: PhaseMap):
    """Spectrally averaged fringe contrast |<S e^{i phi}>| / <S>, in [0, 1].

    Constant phase offsets drop out of the modulus, so only the variation
    of the phase over the joint-spectrum support matters.
    """
    if js.intensity.shape != pm.phase.shape or not (
        np.allclose(js.grid_signal_nm, pm.grid_signal_nm)
        and np.allclose(js.grid_idler_nm, pm.grid_idler_nm)
    ):
        raise GridMismatchError("joint spectrum and phase map grids differ")
    total = js.intensity.sum()
    if total <= 0:
        raise ValueError("joint spectrum carries no intensity")
    z = (js.intensity * np.exp(1j * pm.phase)).sum()
    return float(abs(z) / total)


def _masked_visibility(weights, phase_cells):
    z = (weights * np.exp(1j * phase_cells)).sum()
    return float(abs(z) / weights.sum())


def optimize_compensators(layout: OpticalLayout, js: JointSpectrum,
                          bounds_mm=(0.0, 3.0), coarse_points=5, restarts=3):
    """Find compensator lengths maximizing visibility over a joint spectrum.

    Derivative-free: a coarse grid over the bounds seeds ``restarts``
    bounded Nelder-Mead runs (length tolerance 1 um); deterministic for
    fixed inputs.  The phase is linear in each slot length, so the search
    combines three precomputed maps per evaluation.
    """
    lo, hi = bounds_mm
    if not (0.0 <= lo < hi):
        raise ValueError(f"invalid compensator bounds {bounds_mm}")
    pre, post = layout.compensator_slots()

    grid = js.grid_signal_nm
    others = [e for e in layout.elements if e is not pre and e is not post]
    base_layout = OpticalLayout(others, layout.crystal, layout.pump)
    base = phase_map(base_layout, grid).phase
    unit_pre = phase_map(
        OpticalLayout([replace(pre, length_mm=1.0)], layout.crystal, layout.pump), grid
    ).phase
    unit_post = phase_map(
        OpticalLayout([replace(post, length_mm=1.0)], layout.crystal, layout.pump), grid
    ).phase

    mask = js.intensity > 0
    if not mask.any():
        raise ValueError("joint spectrum carries no intensity")
    w = js.intensity[mask]
    b, up_, upo = base[mask], unit_pre[mask], unit_post[mask]

    def vis(x):
        return _masked_visibility(w, b + x[0] * up_ + x[1] * upo)

    axis = np.linspace(lo, hi, coarse_points)
    coarse = sorted(
        ((vis((a, c)), a, c) for a in axis for c in axis), key=lambda t: -t[0]
    )
    if coarse[0][0] - coarse[-1][0] < 1e-6:
        warnings.warn(
            "visibility varies by less than 1e-6 over the bounds; nothing to compensate",
            FlatObjectiveWarning,
            stacklevel=2,
        )
    best_v, best_x = -1.0, None
    for _, a, c in coarse[:restarts]:
        res = minimize(
            lambda x: -vis(x),
            x0=[a, c],
            method="Nelder-Mead",
            bounds=[(lo, hi), (lo, hi)],
            options=dict(xatol=1e-3, fatol=1e-14, maxiter=600),
        )
        if -res.fun > best_v:
            best_v, best_x = -res.fun, res.x
    return CompensatorFit(float(best_x[0]), float(best_x[1]), float(best_v))
