import numpy as np
import pytest

from pairsource import (
    CrystalSpec,
    JointSpectrum,
    OpticalLayout,
    PhaseMap,
    PumpSpectrum,
    UniaxialElement,
    get_material,
    joint_spectrum,
    optimize_compensators,
    phase_map,
    total_phase,
    visibility,
)
from pairsource.phasemap import FlatObjectiveWarning, GridMismatchError
from pairsource.spdc import default_grid

from conftest import (
    ACTUAL_LENGTHS_MM,
    OPTIMAL_LENGTHS_MM,
    source_elements,
)


def _layout_with_lengths(crystal, pump, pre_mm, post_mm):
    return OpticalLayout(source_elements(pre_mm, post_mm), crystal, pump)


def _vis_at(crystal, pump, js, pre_mm, post_mm):
    pm = phase_map(_layout_with_lengths(crystal, pump, pre_mm, post_mm), js.grid_signal_nm)
    return visibility(js, pm)


class TestTotalPhase:
    def test_zero_length_layout(self, crystal_deg, pump_broadband):
        layout = OpticalLayout(
            [UniaxialElement(get_material("yvo4_o"), get_material("yvo4_e"),
                             0.0, 90.0, +1, "pump", "slot")],
            crystal_deg, pump_broadband,
        )
        assert total_phase(layout, 800.0, 820.5) == 0.0

    def test_pump_element_constant_along_conservation_curves(self, crystal_deg, pump_broadband):
        # two cells sharing one pump wavelength must shift identically when a
        # pump-acting element is added
        lp = 405.0
        pairs = [(790.0, 1 / (1 / lp - 1 / 790.0)), (825.0, 1 / (1 / lp - 1 / 825.0))]
        bare = OpticalLayout([], crystal_deg, pump_broadband)
        dressed = OpticalLayout(
            [UniaxialElement(get_material("yvo4_o"), get_material("yvo4_e"),
                             0.5, 90.0, +1, "pump", "pre")],
            crystal_deg, pump_broadband,
        )
        shifts = [
            total_phase(dressed, ls, li) - total_phase(bare, ls, li) for ls, li in pairs
        ]
        assert shifts[0] == pytest.approx(shifts[1], rel=1e-12)
        assert shifts[0] != 0.0

    def test_matches_elementwise_sum(self, layout_broadband):
        from pairsource import birefringent_phase

        ls, li = 795.0, 826.0
        lp = 1.0 / (1.0 / ls + 1.0 / li)
        T = layout_broadband.crystal.temperature_c
        expected = 0.0
        for el in layout_broadband.elements:
            if el.acts_on == "pump":
                expected += birefringent_phase(el, lp, T)
            else:
                expected += birefringent_phase(el, ls, T) + birefringent_phase(el, li, T)
        assert total_phase(layout_broadband, ls, li) == pytest.approx(expected, rel=1e-14)


class TestPhaseMap:
    def test_constant_layout_constant_map(self, crystal_deg, pump_broadband):
        pm = phase_map(OpticalLayout([], crystal_deg, pump_broadband), default_grid(32))
        assert np.all(pm.phase == 0.0)

    def test_offset_invariance_of_centered_map(self, layout_broadband):
        pm = phase_map(layout_broadband, default_grid(64))
        shifted = pm.phase + 1.234
        np.testing.assert_allclose(
            pm.phase - pm.phase.mean(), shifted - shifted.mean(), atol=1e-12
        )

    def test_actual_vs_optimal_differ_nonconstantly(self, crystal_deg, pump_broadband):
        grid = default_grid(64)
        pm_actual = phase_map(_layout_with_lengths(crystal_deg, pump_broadband, *ACTUAL_LENGTHS_MM), grid)
        pm_optimal = phase_map(_layout_with_lengths(crystal_deg, pump_broadband, *OPTIMAL_LENGTHS_MM), grid)
        diff = pm_actual.phase - pm_optimal.phase
        assert diff.std() > 1e-3

    def test_swap_symmetry(self, layout_broadband):
        pm = phase_map(layout_broadband, default_grid(64))
        np.testing.assert_allclose(pm.phase, pm.phase.T, rtol=0, atol=1e-9)


class TestVisibility:
    def test_constant_phase_gives_unity(self):
        grid = default_grid(16)
        js = JointSpectrum(grid, grid, np.random.default_rng(0).random((16, 16)), 25.0)
        pm = PhaseMap(grid, grid, np.full((16, 16), 0.7))
        assert visibility(js, pm) == pytest.approx(1.0, abs=1e-15)

    def test_uniform_phases_cancel(self):
        grid = default_grid(16)
        js = JointSpectrum(grid, grid, np.ones((16, 16)), 25.0)
        phases = (2 * np.pi * np.arange(256) / 256.0).reshape(16, 16)
        assert visibility(js, PhaseMap(grid, grid, phases)) < 1e-12

    def test_offset_leaves_visibility_unchanged(self, js_broadband, layout_broadband):
        pm = phase_map(layout_broadband, js_broadband.grid_signal_nm)
        v0 = visibility(js_broadband, pm)
        v1 = visibility(js_broadband, PhaseMap(pm.grid_signal_nm, pm.grid_idler_nm, pm.phase + 2.5))
        assert abs(v1 - v0) <= 1e-12

    def test_gradient_scaling_never_increases(self, js_broadband, layout_broadband):
        pm = phase_map(layout_broadband, js_broadband.grid_signal_nm)
        centered = pm.phase - pm.phase.mean()
        vs = [
            visibility(js_broadband, PhaseMap(pm.grid_signal_nm, pm.grid_idler_nm, a * centered))
            for a in (1.0, 2.0, 4.0)
        ]
        assert vs[0] >= vs[1] >= vs[2]

    def test_grid_mismatch_error(self, js_broadband):
        pm = phase_map(OpticalLayout([], CrystalSpec(10.0, 3.425, 25.0),
                                     PumpSpectrum.monochromatic(405.0)), default_grid(64))
        with pytest.raises(GridMismatchError):
            visibility(js_broadband, pm)


class TestOptimizeCompensators:
    def test_nothing_to_compensate(self, crystal_deg):
        pump = PumpSpectrum.monochromatic(405.0)
        layout = OpticalLayout(source_elements(0.5, 0.5)[:1] + source_elements(0.5, 0.5)[3:],
                               crystal_deg, pump)
        js = joint_spectrum(crystal_deg, pump, default_grid(128))
        fit = optimize_compensators(layout, js)
        assert fit.length_pre_mm == pytest.approx(0.0, abs=0.02)
        assert fit.length_post_mm == pytest.approx(0.0, abs=0.02)
        assert fit.visibility == pytest.approx(1.0, abs=1e-9)

    def test_reconstructs_design_lengths(self, js_broadband, layout_broadband):
        fit = optimize_compensators(layout_broadband, js_broadband)
        assert fit.length_pre_mm == pytest.approx(OPTIMAL_LENGTHS_MM[0], abs=0.15)
        assert fit.length_post_mm == pytest.approx(OPTIMAL_LENGTHS_MM[1], abs=0.15)

    def test_beats_random_length_pairs(self, js_broadband, layout_broadband, crystal_deg, pump_broadband):
        fit = optimize_compensators(layout_broadband, js_broadband)
        rng = np.random.default_rng(7)
        for _ in range(100):
            pre, post = rng.uniform(0.0, 3.0, 2)
            assert fit.visibility >= _vis_at(crystal_deg, pump_broadband, js_broadband, pre, post) - 1e-9

    def test_local_maximum(self, js_broadband, layout_broadband, crystal_deg, pump_broadband):
        fit = optimize_compensators(layout_broadband, js_broadband)
        for dpre, dpost in ((0.01, 0.0), (-0.01, 0.0), (0.0, 0.01), (0.0, -0.01)):
            v = _vis_at(crystal_deg, pump_broadband, js_broadband,
                        fit.length_pre_mm + dpre, fit.length_post_mm + dpost)
            assert v < fit.visibility

    def test_flat_objective_warns(self, crystal_deg):
        # a single-cell spectrum is insensitive to any compensator length
        pump = PumpSpectrum.monochromatic(405.0)
        grid = default_grid(16)
        intensity = np.zeros((16, 16))
        intensity[8, 8] = 1.0
        js = JointSpectrum(grid, grid, intensity, crystal_deg.temperature_c)
        layout = OpticalLayout(source_elements(), crystal_deg, pump)
        with pytest.warns(FlatObjectiveWarning):
            optimize_compensators(layout, js)

    def test_requires_exactly_one_slot_per_side(self, crystal_deg, pump_broadband, js_broadband):
        layout = OpticalLayout(source_elements()[1:3], crystal_deg, pump_broadband)  # no slots
        with pytest.raises(ValueError, match="compensator slot"):
            optimize_compensators(layout, js_broadband)

    def test_rejects_bad_bounds(self, js_broadband, layout_broadband):
        with pytest.raises(ValueError, match="bounds"):
            optimize_compensators(layout_broadband, js_broadband, bounds_mm=(2.0, 1.0))


class TestVisibilityOrdering:
    def test_actual_lengths_below_optimal(self, js_broadband, crystal_deg, pump_broadband):
        v_actual = _vis_at(crystal_deg, pump_broadband, js_broadband, *ACTUAL_LENGTHS_MM)
        v_optimal = _vis_at(crystal_deg, pump_broadband, js_broadband, *OPTIMAL_LENGTHS_MM)
        assert v_actual < v_optimal
        assert 0.92 <= v_actual <= 1.0
