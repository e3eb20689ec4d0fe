"""Collinear type-0 quasi-phase-matched down-conversion spectra.

The model is plane-wave and strictly collinear: a pump photon at lambda_p
converts to a signal/idler pair on the energy-conservation curve
1/lambda_s + 1/lambda_i = 1/lambda_p with efficiency sinc^2(dk*L/2), where
dk includes the first-order grating vector 2*pi/poling_period.  Pump
wavelengths beyond the degenerate turning point emit non-collinearly and
are booked as zero collected rate.

Intensities are relative (single overall scale factor against experiment);
all spectral shapes, widths and ratios are predictive.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dispersion import MaterialModel, get_material, refractive_index

__all__ = [
    "CrystalSpec",
    "PumpSpectrum",
    "JointSpectrum",
    "NoSolutionError",
    "NoCrossingError",
    "GridCoarseWarning",
    "delta_k",
    "qpm_intensity",
    "solve_poling_period",
    "solve_phasematched_signal",
    "solve_degenerate_temperature",
    "solve_temperature_for_signal",
    "collinear_rate_vs_pump",
    "joint_spectrum",
    "marginal_spectrum",
    "fwhm",
    "make_pump_comb",
    "default_grid",
]

DK_TOLERANCE = 1e-9  # rad/um, "phase matched" threshold for solved periods

DEFAULT_GRID_RANGE_NM = (730.0, 890.0)
DEFAULT_GRID_POINTS = 512


class NoSolutionError(ValueError):
    """No phase-matching solution exists for the requested condition."""


class NoCrossingError(ValueError):
    """A curve never crosses the level needed for the requested width."""


class GridCoarseWarning(UserWarning):
    """The sampling grid under-resolves an energy-conservation curve."""


@dataclass(frozen=True)
class CrystalSpec:
    """Periodically poled crystal: length (mm), poling period (um), temperature."""

    length_mm: float
    poling_period_um: float
    temperature_c: float
    material: MaterialModel = None

    def __post_init__(self):
        if self.material is None:
            object.__setattr__(self, "material", get_material("ktp_z"))
        if self.length_mm <= 0:
            raise ValueError(f"crystal length must be positive, got {self.length_mm} mm")
        if not 1.0 <= self.poling_period_um <= 50.0:
            raise ValueError(f"poling period {self.poling_period_um} um outside sanity band [1, 50]")


@dataclass(frozen=True)
class PumpSpectrum:
    """Sampled pump spectrum: wavelengths (nm), normalized weights, power (mW)."""

    wavelengths_nm: np.ndarray
    weights: np.ndarray
    total_power_mw: float = 1.0

    def __post_init__(self):
        lam = np.asarray(self.wavelengths_nm, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if lam.shape != w.shape or lam.ndim != 1:
            raise ValueError("pump samples and weights must be matching 1-D arrays")
        if np.any(w < 0):
            raise ValueError("pump weights must be non-negative")
        order = np.argsort(lam)
        lam = lam[order]
        w = w[order]
        total = w.sum()
        if total > 0:
            w = w / total
        object.__setattr__(self, "wavelengths_nm", lam)
        object.__setattr__(self, "weights", w)

    @classmethod
    def monochromatic(cls, wavelength_nm, total_power_mw=1.0):
        return cls(np.array([float(wavelength_nm)]), np.array([1.0]), total_power_mw)

    @classmethod
    def from_csv(cls, path, total_power_mw=1.0):
        """Two-column CSV: wavelength_nm, relative_power.  '#' lines ignored."""
        lam, w = [], []
        with open(path, "r", newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    lam.append(float(row[0]))
                    w.append(float(row[1]))
                except (ValueError, IndexError):
                    continue  # header row
        if not lam:
            raise ValueError(f"no pump samples found in {path}")
        return cls(np.array(lam), np.array(w), total_power_mw)

    def to_csv(self, fh):
        fh.write("wavelength_nm,relative_power\n")
        for lam, w in zip(self.wavelengths_nm, self.weights):
            fh.write(f"{lam:.6f},{w:.9e}\n")


@dataclass
class JointSpectrum:
    """Signal-idler intensity on a rectangular grid.

    ``intensity[i, j]`` belongs to signal wavelength ``grid_signal_nm[i]``
    and idler wavelength ``grid_idler_nm[j]``; relative units unless
    ``relative_scale`` is cleared by a calibrated caller.
    """

    grid_signal_nm: np.ndarray
    grid_idler_nm: np.ndarray
    intensity: np.ndarray
    temperature_c: float
    relative_scale: bool = True

    def __post_init__(self):
        if self.intensity.shape != (len(self.grid_signal_nm), len(self.grid_idler_nm)):
            raise ValueError("intensity shape does not match grid axes")
        if np.any(self.intensity < 0):
            raise ValueError("joint spectrum intensity must be non-negative")

    def to_csv(self, fh):
        """Matrix export: header row = idler axis, first column = signal axis."""
        fh.write("signal_nm\\idler_nm," + ",".join(f"{x:.4f}" for x in self.grid_idler_nm) + "\n")
        for lam_s, row in zip(self.grid_signal_nm, self.intensity):
            fh.write(f"{lam_s:.4f}," + ",".join(f"{v:.6e}" for v in row) + "\n")


def default_grid(n_points=DEFAULT_GRID_POINTS, lo_nm=None, hi_nm=None):
    """Cell-center axis over the emission band (default 730-890 nm)."""
    lo = DEFAULT_GRID_RANGE_NM[0] if lo_nm is None else lo_nm
    hi = DEFAULT_GRID_RANGE_NM[1] if hi_nm is None else hi_nm
    edges = np.linspace(lo, hi, n_points + 1)
    return 0.5 * (edges[:-1] + edges[1:])


def _conjugate(pump_nm, signal_nm):
    return 1.0 / (1.0 / pump_nm - 1.0 / np.asarray(signal_nm, dtype=float))


def delta_k(crystal: CrystalSpec, pump_nm, signal_nm):
    """First-order QPM phase mismatch in rad/um, z-polarized throughout.

    dk = 2*pi * [n(lp)/lp - n(ls)/ls - n(li)/li - 1/period], wavelengths in
    um, with li fixed by energy conservation.  Vectorized over signal.
    """
    ls = np.asarray(signal_nm, dtype=float)
    if np.any(ls <= pump_nm):
        raise ValueError("signal wavelength must exceed the pump wavelength")
    li = _conjugate(pump_nm, ls)
    T = crystal.temperature_c
    n_p = refractive_index(crystal.material, pump_nm, T)
    n_s = refractive_index(crystal.material, ls, T)
    n_i = refractive_index(crystal.material, li, T)
    lp_um, ls_um, li_um = pump_nm / 1000.0, ls / 1000.0, li / 1000.0
    dk = 2.0 * np.pi * (n_p / lp_um - n_s / ls_um - n_i / li_um - 1.0 / crystal.poling_period_um)
    return dk if dk.ndim else float(dk)


def qpm_intensity(delta_k_rad_um, length_mm):
    """sinc^2(dk*L/2) conversion efficiency envelope, in [0, 1], sinc(0) = 1."""
    if length_mm <= 0:
        raise ValueError("crystal length must be positive")
    x = np.asarray(delta_k_rad_um) * (length_mm * 1000.0) / 2.0
    out = np.sinc(x / np.pi) ** 2
    return out if out.ndim else float(out)


def solve_poling_period(pump_nm, degenerate_signal_nm, temperature_c, material=None):
    """Poling period (um) that phase-matches degenerate emission.

    Closed form at degeneracy: period = lp / (n(lp) - n(2*lp)).
    """
    if material is None:
        material = get_material("ktp_z")
    if abs(degenerate_signal_nm - 2.0 * pump_nm) > 1e-9:
        raise ValueError("degenerate solve requires signal = 2 * pump")
    contrast = refractive_index(material, pump_nm, temperature_c) - refractive_index(
        material, degenerate_signal_nm, temperature_c
    )
    if contrast <= 0:
        raise NoSolutionError(
            f"{material.name}: no QPM period exists, index contrast {contrast:.3e} <= 0"
        )
    return (pump_nm / 1000.0) / contrast


def _degenerate_mismatch(crystal, pump_nm):
    return delta_k(crystal, pump_nm, 2.0 * pump_nm)


def solve_phasematched_signal(crystal: CrystalSpec, pump_nm, search_min_nm=650.0):
    """Collinear solution (lambda_s, lambda_i), lambda_s <= lambda_i, or None.

    Returns None when the pump lies beyond the degenerate turning point
    (positive mismatch impossible, emission is non-collinear and booked as
    not collected).
    """
    dk_deg = _degenerate_mismatch(crystal, pump_nm)
    if abs(dk_deg) <= DK_TOLERANCE:
        return 2.0 * pump_nm, 2.0 * pump_nm
    if dk_deg < 0:
        return None
    # mismatch decreases monotonically with detuning from degeneracy, so a
    # single sign change sits in (search_min, 2*pump)
    lo = search_min_nm
    hi = 2.0 * pump_nm * (1.0 - 1e-12)
    f = lambda ls: delta_k(crystal, pump_nm, ls)
    if f(lo) > 0:
        raise NoSolutionError(
            f"signal root below {search_min_nm} nm; emission split exceeds the search window"
        )
    ls = brentq(f, lo, hi, xtol=1e-10)
    li = _conjugate(pump_nm, ls)
    return (ls, li) if ls <= li else (li, ls)


def solve_degenerate_temperature(crystal_length_mm, poling_period_um, pump_nm,
                                 material=None, bracket_c=(-20.0, 200.0)):
    """Temperature at which a given period is degenerate-matched for this pump."""
    if material is None:
        material = get_material("ktp_z")

    def f(T):
        c = CrystalSpec(crystal_length_mm, poling_period_um, T, material)
        return _degenerate_mismatch(c, pump_nm)

    return brentq(f, *bracket_c, xtol=1e-9)


def solve_temperature_for_signal(crystal_length_mm, poling_period_um, pump_nm, signal_nm,
                                 material=None, bracket_c=(-20.0, 250.0)):
    """Temperature at which emission is phase-matched at a chosen signal wavelength."""
    if material is None:
        material = get_material("ktp_z")

    def f(T):
        c = CrystalSpec(crystal_length_mm, poling_period_um, T, material)
        return delta_k(c, pump_nm, signal_nm)

    return brentq(f, *bracket_c, xtol=1e-9)


def collinear_rate_vs_pump(crystal: CrystalSpec, pump: PumpSpectrum,
                           band_nm=DEFAULT_GRID_RANGE_NM, n_samples=2000):
    """Relative collected rate per pump sample across the pump spectrum.

    rate(lp) = weight(lp) * integral of sinc^2 over the emission band;
    identically zero beyond the degenerate turning point.
    """
    lam_band = np.linspace(band_nm[0], band_nm[1], n_samples)
    out = []
    for lp, w in zip(pump.wavelengths_nm, pump.weights):
        if w == 0.0 or solve_phasematched_signal(crystal, lp) is None:
            out.append((float(lp), 0.0))
            continue
        rate = w * float(np.trapezoid(qpm_intensity(delta_k(crystal, lp, lam_band), crystal.length_mm), lam_band))
        out.append((float(lp), rate))
    return out


def joint_spectrum(crystal: CrystalSpec, pump: PumpSpectrum, grid_nm=None):
    """Rasterize every pump sample's energy-conservation curve onto a grid.

    Each pump sample deposits weight * sinc^2(dk*L/2) into the idler cells
    its conjugate crosses within each signal column, split by exact
    interval overlap, so column sums reproduce the collinear efficiency
    and every non-zero cell obeys energy conservation to within a cell.
    Samples beyond the degenerate turning point contribute nothing
    (non-collinear, not collected).  For identical axes the result is
    symmetrized under signal-idler swap.
    """
    centers = default_grid() if grid_nm is None else np.asarray(grid_nm, dtype=float)
    n = len(centers)
    step = centers[1] - centers[0]
    if not np.allclose(np.diff(centers), step, rtol=1e-9):
        raise ValueError("joint_spectrum requires a uniformly spaced grid")
    edges = np.concatenate([[centers[0] - step / 2.0], centers + step / 2.0])
    lo, hi = edges[0], edges[-1]
    S = np.zeros((n, n))

    for lp, w in zip(pump.wavelengths_nm, pump.weights):
        if w == 0.0 or solve_phasematched_signal(crystal, lp) is None:
            continue
        conj_edges = _conjugate(lp, edges)
        amp = w * qpm_intensity(delta_k(crystal, lp, centers), crystal.length_mm)
        # conjugate is decreasing: column j of signal spans idler [ce[j+1], ce[j]]
        span_cells = 0
        deposited_cols = 0
        for j in range(n):
            a, b = conj_edges[j + 1], conj_edges[j]
            if b <= lo or a >= hi or amp[j] <= 0.0:
                continue
            deposited_cols += 1
            k0 = max(np.searchsorted(edges, a, side="right") - 1, 0)
            k1 = min(np.searchsorted(edges, b, side="left"), n)
            if k1 - k0 >= 3:
                span_cells += 1
            width = b - a
            for k in range(k0, k1):
                overlap = min(b, edges[k + 1]) - max(a, edges[k])
                if overlap > 0:
                    S[j, k] += amp[j] * overlap / width
        if deposited_cols and span_cells / deposited_cols > 0.10:
            warnings.warn(
                f"grid too coarse for pump sample at {lp:.3f} nm: its energy "
                f"conservation curve crosses >2 idler cells per column in "
                f"{span_cells}/{deposited_cols} columns",
                GridCoarseWarning,
                stacklevel=2,
            )

    S = 0.5 * (S + S.T)
    return JointSpectrum(centers.copy(), centers.copy(), S, crystal.temperature_c)


def marginal_spectrum(js: JointSpectrum):
    """Sum over the conjugate axis -> (wavelength_nm, intensity) arrays."""
    return js.grid_signal_nm.copy(), js.intensity.sum(axis=1)


def fwhm(x, y):
    """Full width at half maximum from the outermost half-max crossings.

    Linear interpolation between samples; raises :class:`NoCrossingError`
    when the curve never falls below half maximum on one side.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("curve needs at least 3 matching samples")
    half = y.max() / 2.0
    above = y >= half
    idx = np.flatnonzero(above)
    first, last = idx[0], idx[-1]
    if first == 0:
        raise NoCrossingError("curve never falls below half maximum on the left")
    if last == len(y) - 1:
        raise NoCrossingError("curve never falls below half maximum on the right")
    # interpolate the two outermost crossings
    xl = x[first - 1] + (half - y[first - 1]) * (x[first] - x[first - 1]) / (y[first] - y[first - 1])
    xr = x[last] + (half - y[last]) * (x[last + 1] - x[last]) / (y[last + 1] - y[last])
    return float(xr - xl)


def make_pump_comb(center_nm, envelope_fwhm_nm, mode_spacing_nm, total_power_mw=1.0, n_modes=40):
    """Longitudinal-mode comb under a Gaussian envelope, normalized.

    Modes sit at center + k*spacing with k covering ``n_modes`` integers
    including k = 0, so a spacing much wider than the envelope collapses to
    a single mode at the center.
    """
    if center_nm <= 0 or envelope_fwhm_nm <= 0 or mode_spacing_nm <= 0:
        raise ValueError("pump comb arguments must be positive")
    k = np.arange(-(n_modes // 2), n_modes - n_modes // 2)
    lam = center_nm + k * mode_spacing_nm
    sigma = envelope_fwhm_nm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    w = np.exp(-0.5 * ((lam - center_nm) / sigma) ** 2)
    return PumpSpectrum(lam, w, total_power_mw)
