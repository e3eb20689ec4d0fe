"""Two-qubit HH/VV polarization correlations, visibilities and QBER.

The state is parametrized by the diagonal-basis coherence ``coherence``
(the spectrally averaged fringe contrast a phase map predicts), its phase,
and a separate crosstalk-limited ``hv_visibility``.  Crosstalk is what
breaks the HH/VV structure, so the two error mechanisms stay independently
testable: the H/V fringe contrast equals ``hv_visibility`` regardless of
phase, the D/A contrast equals ``coherence * |cos phase|``.

Angle convention: H = 0 deg, V = 90 deg, D = 45 deg, A = 135 deg.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolarizationState",
    "MeasurementSetup",
    "CorrelationCurve",
    "FitError",
    "coincidence_probability",
    "correlation_curve",
    "visibility_from_curve",
    "qber_from_visibility",
]


class FitError(RuntimeError):
    """Fringe fit residuals exceed what counting noise can explain."""


@dataclass(frozen=True)
class PolarizationState:
    """(|HH> + e^{i phase} |VV>)/sqrt(2) with imperfect coherence and crosstalk."""

    coherence: float
    phase_rad: float = 0.0
    hv_visibility: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.coherence <= 1.0:
            raise ValueError(f"coherence {self.coherence} outside [0, 1]")
        if not 0.0 <= self.hv_visibility <= 1.0:
            raise ValueError(f"hv_visibility {self.hv_visibility} outside [0, 1]")


@dataclass(frozen=True)
class MeasurementSetup:
    """Rates, polarizer transmission and integration time of a correlation scan."""

    polarizer_transmission: float
    true_pair_rate: float
    accidental_rate: float = 0.0
    integration_time_s: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.polarizer_transmission <= 1.0:
            raise ValueError("polarizer transmission must be in (0, 1]")
        if self.true_pair_rate < 0 or self.accidental_rate < 0:
            raise ValueError("rates must be non-negative")
        if self.integration_time_s <= 0:
            raise ValueError("integration time must be positive")


@dataclass
class CorrelationCurve:
    """Counts vs signal-polarizer angle at one fixed idler setting."""

    theta_signal_deg: np.ndarray
    counts: np.ndarray
    sigma_counts: np.ndarray
    theta_idler_deg: float

    def to_csv(self, fh):
        fh.write("theta_s_deg,counts,sigma_counts\n")
        for t, c, s in zip(self.theta_signal_deg, self.counts, self.sigma_counts):
            fh.write(f"{t:.4f},{c:.6f},{s:.6f}\n")


def coincidence_probability(state: PolarizationState, theta_s_deg, theta_i_deg):
    """Probability of a joint transmission through polarizers at the two angles.

    P = 1/4 [1 + V_hv cos(2 ts) cos(2 ti) + V cos(phi) sin(2 ts) sin(2 ti)];
    the four outcomes over mutually orthogonal settings sum to one.
    """
    ts = np.deg2rad(np.asarray(theta_s_deg, dtype=float))
    ti = np.deg2rad(np.asarray(theta_i_deg, dtype=float))
    p = 0.25 * (
        1.0
        + state.hv_visibility * np.cos(2 * ts) * np.cos(2 * ti)
        + state.coherence * np.cos(state.phase_rad) * np.sin(2 * ts) * np.sin(2 * ti)
    )
    return p if np.ndim(p) else float(p)


def correlation_curve(state: PolarizationState, setup: MeasurementSetup,
                      theta_i_deg, theta_s_scan_deg, seed=None):
    """Expected (or Poisson-sampled, when seeded) counts over a polarizer scan.

    counts = [pair_rate * t^2 * P(ts, ti) + accidental_rate * t^2 / 4] * T;
    accidentals are unpolarized, hence the angle-independent 1/4.
    """
    thetas = np.asarray(theta_s_scan_deg, dtype=float)
    t2 = setup.polarizer_transmission**2
    p = coincidence_probability(state, thetas, theta_i_deg)
    mu = (setup.true_pair_rate * t2 * p + setup.accidental_rate * t2 * 0.25) * setup.integration_time_s
    if seed is None:
        counts = mu
    else:
        counts = np.random.default_rng(seed).poisson(mu).astype(float)
    return CorrelationCurve(thetas.copy(), counts, np.sqrt(np.maximum(counts, 1.0)), float(theta_i_deg))


def visibility_from_curve(curve: CorrelationCurve, max_residual_sigma=5.0):
    """Least-squares fringe visibility (V, sigma_V) from one scan.

    Fits A + B cos(2(ts - t0)) via the linear basis (1, cos 2ts, sin 2ts)
    weighted by Poisson errors; sigma_V propagates the fit covariance.
    Raises :class:`FitError` when the weighted rms residual exceeds
    ``max_residual_sigma``.
    """
    th = np.asarray(curve.theta_signal_deg, dtype=float)
    y = np.asarray(curve.counts, dtype=float)
    if len(th) < 8 or (th.max() - th.min()) < 180.0:
        raise ValueError("curve must span at least 180 deg with at least 8 points")
    sig = np.asarray(curve.sigma_counts, dtype=float)
    sig = np.where(sig > 0, sig, 1.0)

    x = np.deg2rad(th)
    X = np.column_stack([np.ones_like(x), np.cos(2 * x), np.sin(2 * x)])
    w = 1.0 / sig**2
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    beta = cov @ (X.T @ (y * w))
    a0, a1, a2 = beta

    resid = (y - X @ beta) / sig
    rms = float(np.sqrt(np.mean(resid**2)))
    if rms > max_residual_sigma:
        raise FitError(f"weighted rms residual {rms:.2f} sigma exceeds {max_residual_sigma}")

    amp = float(np.hypot(a1, a2))
    if a0 <= 0:
        raise FitError("fitted mean count level is not positive")
    v_est = amp / a0
    if amp == 0.0:
        sigma_v = float(np.sqrt(cov[1, 1] + cov[2, 2]) / a0)
    else:
        g = np.array([-amp / a0**2, a1 / (amp * a0), a2 / (amp * a0)])
        sigma_v = float(np.sqrt(g @ cov @ g))
    return v_est, sigma_v


def qber_from_visibility(average_visibility):
    """Intrinsic quantum bit error rate of a visibility-limited source: (1-V)/2."""
    v = float(average_visibility)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility {v} outside [0, 1]")
    return (1.0 - v) / 2.0
