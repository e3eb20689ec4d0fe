import pytest

from pairsource import (
    CrystalSpec,
    OpticalLayout,
    UniaxialElement,
    get_material,
    joint_spectrum,
    make_pump_comb,
    solve_degenerate_temperature,
)

PUMP_NM = 405.0
POLING_UM = 3.425
KTP_LENGTH_MM = 10.0
DISPLACER_MM = 13.0
COMBINER_MM = 13.76
ACTUAL_LENGTHS_MM = (0.92, 1.04)
OPTIMAL_LENGTHS_MM = (0.78, 0.97)


def source_elements(pre_mm=ACTUAL_LENGTHS_MM[0], post_mm=ACTUAL_LENGTHS_MM[1]):
    """The shipped beam-displacement layout with configurable compensators."""
    bbo = (get_material("bbo_o"), get_material("bbo_e"))
    yvo = (get_material("yvo4_o"), get_material("yvo4_e"))
    return [
        UniaxialElement(*yvo, pre_mm, 90.0, +1, "pump", "pre_compensator"),
        UniaxialElement(*bbo, DISPLACER_MM, 45.0, -1, "pump", "displacer"),
        UniaxialElement(*bbo, COMBINER_MM, 45.0, +1, "signal_and_idler", "combiner"),
        UniaxialElement(*yvo, post_mm, 90.0, -1, "signal_and_idler", "post_compensator"),
    ]


@pytest.fixture(scope="session")
def degenerate_temperature_c():
    return solve_degenerate_temperature(KTP_LENGTH_MM, POLING_UM, PUMP_NM)


@pytest.fixture(scope="session")
def crystal_deg(degenerate_temperature_c):
    return CrystalSpec(KTP_LENGTH_MM, POLING_UM, degenerate_temperature_c)


@pytest.fixture(scope="session")
def pump_broadband():
    return make_pump_comb(PUMP_NM, 0.25, 0.05, total_power_mw=150.0, n_modes=40)


@pytest.fixture(scope="session")
def js_broadband(crystal_deg, pump_broadband):
    return joint_spectrum(crystal_deg, pump_broadband)


@pytest.fixture(scope="session")
def layout_broadband(crystal_deg, pump_broadband):
    return OpticalLayout(source_elements(), crystal_deg, pump_broadband)
