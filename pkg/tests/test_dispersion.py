import json

import numpy as np
import pytest

from pairsource import (
    UniaxialElement,
    WavelengthRangeError,
    birefringent_phase,
    get_material,
    index_at_angle,
    load_materials,
    refractive_index,
    walkoff_angle,
)
from pairsource.dispersion import MATERIALS_ENV_VAR

# frozen from an independent 40-digit evaluation of the shipped coefficient sets
KTP_NZ_810_25C = 1.8443672263926988
YVO4_PHASE_078MM_405NM = 3264.327091314782  # rad, slow-fast, L = 0.78 mm
BBO_N45_405NM = 1.6258789936207356

ALL_MODELS = ("ktp_z", "bbo_o", "bbo_e", "yvo4_o", "yvo4_e")


class TestRefractiveIndex:
    def test_ktp_z_published_value(self):
        n = refractive_index(get_material("ktp_z"), 810.0, 25.0)
        assert n == pytest.approx(KTP_NZ_810_25C, abs=1e-3)
        assert n == pytest.approx(KTP_NZ_810_25C, rel=1e-12)  # regression against the frozen oracle

    def test_thermo_correction_vanishes_at_reference(self):
        for name in ALL_MODELS:
            m = get_material(name)
            lam = 0.5 * sum(m.valid_range_nm)
            assert refractive_index(m, lam, m.reference_temperature_c) == refractive_index(m, lam)

    def test_index_contrast_matches_grating_vector(self):
        # first-order QPM at 3.425 um demands nz(405) - nz(810) = 405/3425
        m = get_material("ktp_z")
        for T in (20.0, 25.0, 30.0, 40.0):
            contrast = refractive_index(m, 405.0, T) - refractive_index(m, 810.0, T)
            assert contrast == pytest.approx(405.0 / 3425.0, rel=0.02)

    def test_out_of_range_raises_with_model_and_window(self):
        m = get_material("ktp_z")
        with pytest.raises(WavelengthRangeError, match=r"ktp_z.*399.*\[400, 1200\]"):
            refractive_index(m, 399.0)
        with pytest.raises(WavelengthRangeError):
            refractive_index(m, np.array([810.0, 1500.0]))

    def test_index_physical_over_valid_range(self):
        for name in ALL_MODELS:
            m = get_material(name)
            lam = np.linspace(*m.valid_range_nm, 200)
            n = refractive_index(m, lam)
            assert np.all(np.isfinite(n)) and np.all((n > 1.0) & (n < 3.0))

    def test_normal_dispersion(self):
        # monotonically decreasing n(lambda) over 380-900 nm for every model
        for name in ALL_MODELS:
            m = get_material(name)
            lo = max(380.0, m.valid_range_nm[0])
            lam = np.linspace(lo, 900.0, 400)
            n = refractive_index(m, lam)
            assert np.all(np.diff(n) < 0), name

    def test_uniaxial_signs(self):
        lam = np.linspace(400.0, 900.0, 50)
        assert np.all(
            refractive_index(get_material("bbo_o"), lam) > refractive_index(get_material("bbo_e"), lam)
        ), "BBO must be negative uniaxial"
        assert np.all(
            refractive_index(get_material("yvo4_e"), lam) > refractive_index(get_material("yvo4_o"), lam)
        ), "YVO4 must be positive uniaxial"


class TestIndexAtAngle:
    def test_axis_limits(self):
        assert index_at_angle(1.66, 1.55, 0.0) == pytest.approx(1.66, rel=1e-14)
        assert index_at_angle(1.66, 1.55, 90.0) == pytest.approx(1.55, rel=1e-14)

    def test_bbo_45deg_405nm(self):
        n_o = refractive_index(get_material("bbo_o"), 405.0)
        n_e = refractive_index(get_material("bbo_e"), 405.0)
        n45 = index_at_angle(n_o, n_e, 45.0)
        assert n45 == pytest.approx(1.626, abs=3e-3)
        # direct arithmetic from the two indices
        assert n45 == pytest.approx(1.0 / np.sqrt(0.5 / n_o**2 + 0.5 / n_e**2), rel=1e-14)
        assert n45 == pytest.approx(BBO_N45_405NM, rel=1e-12)

    def test_strictly_between_for_interior_angles(self):
        for theta in (10.0, 30.0, 45.0, 60.0, 80.0):
            n = index_at_angle(1.66, 1.55, theta)
            assert 1.55 < n < 1.66


class TestWalkoff:
    def test_on_axis_is_zero(self):
        assert walkoff_angle(1.66, 1.55, 0.0) == 0.0

    @pytest.mark.parametrize(
        "length_mm,lam_nm", [(13.0, 405.0), (13.76, 810.0)]
    )
    def test_displacer_geometry(self, length_mm, lam_nm):
        n_o = refractive_index(get_material("bbo_o"), lam_nm)
        n_e = refractive_index(get_material("bbo_e"), lam_nm)
        displacement = length_mm * np.tan(walkoff_angle(n_o, n_e, 45.0))
        assert displacement == pytest.approx(1.0, rel=0.05)

    def test_maximal_near_45deg(self):
        pairs = (("bbo_o", "bbo_e", 405.0), ("bbo_o", "bbo_e", 810.0), ("yvo4_o", "yvo4_e", 633.0))
        thetas = np.linspace(1.0, 89.0, 441)
        for o_name, e_name, lam in pairs:
            n_o = refractive_index(get_material(o_name), lam)
            n_e = refractive_index(get_material(e_name), lam)
            rho = walkoff_angle(n_o, n_e, thetas)
            assert abs(thetas[np.argmax(rho)] - 45.0) <= 5.0


def _element(length_mm=0.78, sign=+1, cut=90.0):
    return UniaxialElement(
        get_material("yvo4_o"), get_material("yvo4_e"), length_mm, cut, sign, "pump", "pre"
    )


class TestBirefringentPhase:
    def test_zero_length(self):
        assert birefringent_phase(_element(0.0), 405.0) == 0.0

    def test_linear_in_length(self):
        assert birefringent_phase(_element(1.56), 405.0) == pytest.approx(
            2.0 * birefringent_phase(_element(0.78), 405.0), rel=1e-14
        )

    def test_yvo4_golden_value(self):
        # frozen independent high-precision evaluation; unwrapped (many turns)
        phi = birefringent_phase(_element(0.78), 405.0)
        assert phi == pytest.approx(YVO4_PHASE_078MM_405NM, rel=1e-9)
        assert phi > 2 * np.pi  # really not wrapped

    def test_arm_sign_antisymmetry(self):
        lam = np.linspace(720.0, 900.0, 7)
        plus = birefringent_phase(_element(sign=+1), lam)
        minus = birefringent_phase(_element(sign=-1), lam)
        np.testing.assert_allclose(minus, -plus, rtol=1e-15)

    def test_cut_element_uses_angle_index(self):
        # at 45 deg the walking polarization sees n(45) and the other n_o
        el = UniaxialElement(
            get_material("bbo_o"), get_material("bbo_e"), 13.0, 45.0, +1, "pump", "displacer"
        )
        n_o = refractive_index(get_material("bbo_o"), 405.0)
        n_e = refractive_index(get_material("bbo_e"), 405.0)
        expected = 2 * np.pi * 13.0e6 * (n_o - index_at_angle(n_o, n_e, 45.0)) / 405.0
        assert birefringent_phase(el, 405.0) == pytest.approx(expected, rel=1e-14)


class TestMaterialsFile:
    def test_env_var_override(self, tmp_path, monkeypatch):
        custom = {
            "materials": [
                {
                    "name": "flint",
                    "axis": "ordinary",
                    "form": "sellmeier_pole",
                    "coefficients": [2.56, 0.01, 0.02, 0.0],
                    "valid_range_nm": [400, 900],
                    "reference_temperature_c": 20.0,
                }
            ]
        }
        path = tmp_path / "alt.json"
        path.write_text(json.dumps(custom))
        monkeypatch.setenv(MATERIALS_ENV_VAR, str(path))
        models = load_materials()
        assert set(models) == {"flint"}
        assert refractive_index(models["flint"], 600.0) > 1.5

    def test_element_validation(self):
        with pytest.raises(ValueError, match="length"):
            _element(-1.0)
        with pytest.raises(ValueError, match="cut angle"):
            _element(cut=120.0)
        with pytest.raises(ValueError, match="arm_sign"):
            _element(sign=2)
