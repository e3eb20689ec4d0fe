"""Published design-point values for the shipped source configuration.

These are the measured/derived numbers the shipped ``source_405nm.json``
configuration is verified against by ``pairsource reproduce-all`` and by
the acceptance test suite.  Tolerances are part of the contract; keep them
in one place so the CLI verdict and the tests can never drift apart.
"""

REFERENCE = {
    # quasi-phase matching
    "poling_period_um": 3.425,
    "poling_period_rel_tol": 0.01,
    "poling_temperatures_c": (20.0, 25.0, 30.0, 35.0, 40.0),
    # walk-off geometry
    "displacement_mm": 1.00,
    "displacement_rel_tol": 0.05,
    "displacer_length_mm": 13.0,
    "displacer_wavelength_nm": 405.0,
    "combiner_length_mm": 13.76,
    "combiner_wavelength_nm": 810.0,
    "cut_angle_deg": 45.0,
    # spectra
    "degenerate_fwhm_nm": 14.0,
    "degenerate_fwhm_rel_tol": 0.30,
    "nondegenerate_pair_nm": (780.0, 842.0),
    "nondegenerate_fwhm_max_nm": 4.0,
    "support_window_nm": (755.0, 875.0),
    "support_min_span_nm": 90.0,
    # relative brightness
    "brightness_ratio": 4.0,
    "brightness_ratio_rel_tol": 0.40,
    # compensation
    "optimal_compensators_mm": (0.78, 0.97),
    "compensator_abs_tol_mm": 0.15,
    "actual_compensators_mm": (0.92, 1.04),
    "visibility_da_broadband": 0.964,
    "visibility_da_abs_tol": 0.04,
    "visibility_da_band": (0.92, 1.00),
    "visibility_hv_broadband": 0.990,
    # counting
    "average_visibility": 0.977,
    "qber": 0.0115,
    "brightness_pairs_per_s_per_mw": 0.56e6,
    "pair_to_singles": 0.21,
    "projected_power_mw": 1000.0,
    "projected_rate_band": (1.0e10, 1.5e10),
}
