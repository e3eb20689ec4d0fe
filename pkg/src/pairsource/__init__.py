"""Design and simulation toolkit for broadband-pumped photon-pair sources.

Submodules:

* :mod:`pairsource.dispersion` -- Sellmeier models, birefringence, walk-off
* :mod:`pairsource.spdc` -- quasi-phase-matched down-conversion spectra
* :mod:`pairsource.phasemap` -- interferometric phase and its compensation
* :mod:`pairsource.polarization` -- two-qubit correlations and visibilities
* :mod:`pairsource.counting` -- rates, dead time, multiplexing, Monte Carlo
* :mod:`pairsource.cli` -- config-driven command line front end
"""

from .dispersion import (
    MaterialModel,
    UniaxialElement,
    WavelengthRangeError,
    birefringent_phase,
    get_material,
    index_at_angle,
    load_materials,
    refractive_index,
    walkoff_angle,
)
from .spdc import (
    CrystalSpec,
    JointSpectrum,
    NoSolutionError,
    PumpSpectrum,
    collinear_rate_vs_pump,
    delta_k,
    fwhm,
    joint_spectrum,
    make_pump_comb,
    marginal_spectrum,
    qpm_intensity,
    solve_degenerate_temperature,
    solve_phasematched_signal,
    solve_poling_period,
    solve_temperature_for_signal,
)
from .phasemap import (
    CompensatorFit,
    OpticalLayout,
    PhaseMap,
    optimize_compensators,
    phase_map,
    total_phase,
    visibility,
)
from .polarization import (
    CorrelationCurve,
    MeasurementSetup,
    PolarizationState,
    coincidence_probability,
    correlation_curve,
    qber_from_visibility,
    visibility_from_curve,
)
from .counting import (
    CountingScenario,
    EventStreams,
    MultiplexSummary,
    accidental_rate,
    count_coincidences,
    dead_time_observed,
    detected_rates,
    multiplex_summary,
    simulate_event_streams,
)

__version__ = "0.1.0"
