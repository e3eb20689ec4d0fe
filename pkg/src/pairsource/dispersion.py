"""Refractive index, birefringence and walk-off for the source crystals.

Conventions used throughout the package:

* wavelengths cross API boundaries in nanometres,
* crystal lengths in millimetres,
* temperatures in degrees Celsius,
* angles in degrees at API boundaries, radians for returned walk-off,
* phases in radians, never wrapped.

Sellmeier coefficients live in ``data/materials.json`` (one record per
crystal axis) so an alternative published set can be swapped in without
touching code.  The environment variable ``PAIRSOURCE_MATERIALS`` overrides
the packaged file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

__all__ = [
    "MaterialModel",
    "UniaxialElement",
    "WavelengthRangeError",
    "load_materials",
    "get_material",
    "refractive_index",
    "index_at_angle",
    "walkoff_angle",
    "birefringent_phase",
]

MATERIALS_ENV_VAR = "PAIRSOURCE_MATERIALS"


class WavelengthRangeError(ValueError):
    """Wavelength outside the validity window of a dispersion model."""


@dataclass(frozen=True)
class MaterialModel:
    """One crystal axis: Sellmeier fit plus optional dn/dT correction."""

    name: str
    axis: str  # 'ordinary' | 'extraordinary' | 'z'
    form: str
    coefficients: tuple
    thermo_first: tuple = ()   # dn/dT   = c0 + c1/L + c2/L^2 + c3/L^3, L in um
    thermo_second: tuple = ()  # d2n/dT2 polynomial, same basis
    valid_range_nm: tuple = (200.0, 2500.0)
    reference_temperature_c: float = 25.0
    source: str = ""

    def __post_init__(self):
        if self.axis not in ("ordinary", "extraordinary", "z"):
            raise ValueError(f"{self.name}: unknown axis {self.axis!r}")
        if self.valid_range_nm[0] >= self.valid_range_nm[1]:
            raise ValueError(f"{self.name}: empty valid range {self.valid_range_nm}")


@dataclass(frozen=True)
class UniaxialElement:
    """A birefringent element in one interferometer path.

    ``arm_sign`` states which arm's phase the element adds to in the
    VV-minus-HH bookkeeping (+1 adds its slow-fast retardation to the VV
    arm, -1 to the HH arm).  ``acts_on`` selects the wavelength the element
    is evaluated at: the pump, or both down-converted photons.
    """

    material_o: MaterialModel
    material_e: MaterialModel
    length_mm: float
    cut_angle_deg: float
    arm_sign: int
    acts_on: str  # 'pump' | 'signal_and_idler'
    name: str = ""

    def __post_init__(self):
        if self.length_mm < 0:
            raise ValueError(f"element {self.name!r}: length must be positive, got {self.length_mm}")
        if not 0.0 <= self.cut_angle_deg <= 90.0:
            raise ValueError(f"element {self.name!r}: cut angle {self.cut_angle_deg} outside [0, 90] deg")
        if self.arm_sign not in (-1, 1):
            raise ValueError(f"element {self.name!r}: arm_sign must be +1 or -1")
        if self.acts_on not in ("pump", "signal_and_idler"):
            raise ValueError(f"element {self.name!r}: acts_on must be 'pump' or 'signal_and_idler'")


def _default_materials_path():
    override = os.environ.get(MATERIALS_ENV_VAR)
    if override:
        return override
    return resources.files("pairsource") / "data" / "materials.json"


def load_materials(path=None) -> dict:
    """Load every material record from a JSON data file into a name->model dict."""
    src = path if path is not None else _default_materials_path()
    if hasattr(src, "read_text"):
        raw = json.loads(src.read_text())
    else:
        with open(src, "r") as fh:
            raw = json.load(fh)
    models = {}
    for rec in raw["materials"]:
        thermo = rec.get("thermo_optic", {}) or {}
        model = MaterialModel(
            name=rec["name"],
            axis=rec["axis"],
            form=rec["form"],
            coefficients=tuple(rec["coefficients"]),
            thermo_first=tuple(thermo.get("first", ())),
            thermo_second=tuple(thermo.get("second", ())),
            valid_range_nm=tuple(rec["valid_range_nm"]),
            reference_temperature_c=rec.get("reference_temperature_c", 25.0),
            source=rec.get("source", ""),
        )
        models[model.name] = model
    return models


_MATERIALS_CACHE: dict = {}


def get_material(name: str) -> MaterialModel:
    """Fetch one shipped material by name (cached)."""
    if not _MATERIALS_CACHE:
        _MATERIALS_CACHE.update(load_materials())
    try:
        return _MATERIALS_CACHE[name]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; shipped: {sorted(_MATERIALS_CACHE)}") from None


def _n_squared(form: str, c, L2):
    if form == "sellmeier_frac":
        return c[0] + c[1] / (1.0 - c[2] / L2) + c[3] / (1.0 - c[4] / L2) - c[5] * L2
    if form == "sellmeier_pole":
        return c[0] + c[1] / (L2 - c[2]) - c[3] * L2
    if form == "sellmeier_l2":
        n2 = 1.0
        for b, pole in zip(c[0::2], c[1::2]):
            n2 = n2 + b * L2 / (L2 - pole)
        return n2
    raise ValueError(f"unknown Sellmeier form {form!r}")


def _inv_lambda_poly(coeffs, L_um):
    out = 0.0
    for k, ck in enumerate(coeffs):
        out = out + ck / L_um**k
    return out


def refractive_index(model: MaterialModel, wavelength_nm, temperature_c=None):
    """Index n(lambda, T); accepts scalar or array wavelengths.

    Raises :class:`WavelengthRangeError` outside ``model.valid_range_nm``.
    At ``temperature_c == reference_temperature_c`` the thermo-optic
    correction is exactly zero.
    """
    lam = np.asarray(wavelength_nm, dtype=float)
    lo, hi = model.valid_range_nm
    if np.any(lam < lo) or np.any(lam > hi):
        bad = lam[(lam < lo) | (lam > hi)]
        raise WavelengthRangeError(
            f"{model.name}: wavelength {np.min(bad):.1f} nm outside valid range "
            f"[{lo:.0f}, {hi:.0f}] nm"
        )
    L_um = lam / 1000.0
    n = np.sqrt(_n_squared(model.form, model.coefficients, L_um**2))
    if temperature_c is not None:
        dT = temperature_c - model.reference_temperature_c
        if dT != 0.0:
            if model.thermo_first:
                n = n + _inv_lambda_poly(model.thermo_first, L_um) * dT
            if model.thermo_second:
                n = n + _inv_lambda_poly(model.thermo_second, L_um) * dT**2
    return n if n.ndim else float(n)


def index_at_angle(n_o, n_e, theta_deg):
    """Extraordinary-wave index for propagation at ``theta_deg`` to the optic axis.

    1/n(theta)^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2; reduces to n_o at
    0 deg and n_e at 90 deg.
    """
    t = np.deg2rad(theta_deg)
    inv_n2 = np.cos(t) ** 2 / np.asarray(n_o) ** 2 + np.sin(t) ** 2 / np.asarray(n_e) ** 2
    n = 1.0 / np.sqrt(inv_n2)
    return n if np.ndim(n) else float(n)


def walkoff_angle(n_o, n_e, theta_deg):
    """Poynting-vector walk-off magnitude (radians) of the extraordinary wave.

    tan(rho) = (n(theta)^2 / 2) * |1/n_e^2 - 1/n_o^2| * sin(2*theta)
    """
    t = np.deg2rad(theta_deg)
    n_t = index_at_angle(n_o, n_e, theta_deg)
    tan_rho = (np.asarray(n_t) ** 2 / 2.0) * np.abs(1.0 / np.asarray(n_e) ** 2 - 1.0 / np.asarray(n_o) ** 2) * np.sin(2 * t)
    rho = np.arctan(tan_rho)
    return rho if np.ndim(rho) else float(rho)


def birefringent_phase(element: UniaxialElement, wavelength_nm, temperature_c=None):
    """Unwrapped slow-minus-fast retardation of one element, in radians.

    The walking polarization sees ``index_at_angle(n_o, n_e, cut_angle)``,
    the other polarization sees ``n_o``; the sign is carried entirely by
    ``element.arm_sign``.  Phase is linear in length and is not reduced
    modulo 2*pi, so spectral phase slopes stay meaningful.  The walk-off
    path elongation (1/cos(rho), about 0.3% for the 45-degree displacers)
    is below the dispersion-data uncertainty and is not applied.
    """
    lam = np.asarray(wavelength_nm, dtype=float)
    n_o = refractive_index(element.material_o, lam, temperature_c)
    n_e = refractive_index(element.material_e, lam, temperature_c)
    n_walk = index_at_angle(n_o, n_e, element.cut_angle_deg)
    slow = np.maximum(n_o, n_walk)
    fast = np.minimum(n_o, n_walk)
    phase = element.arm_sign * 2.0 * np.pi * (element.length_mm * 1e6) * (slow - fast) / lam
    return phase if phase.ndim else float(phase)
