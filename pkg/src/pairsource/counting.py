"""Detection-rate arithmetic, dead time, multiplexing, and a Monte Carlo oracle.

Analytic model: pairs are born in a homogeneous Poisson process; each
photon survives its arm efficiency independently; accidental coincidences
between uncorrelated singles follow A = S_s * S_i * tau for the one-sided
window [0, tau); detectors saturate non-paralyzably, R/(1 + R * tau_d).
Splitting the emission into N matched wavelength channels divides the
accidental rate by N while keeping every true pair, which is the whole
point of multiplexed detection.

``simulate_event_streams`` + ``count_coincidences`` form an independent
timestamp-level oracle for all of the closed forms above.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CountingScenario",
    "DetectedRates",
    "ChannelCounts",
    "MultiplexSummary",
    "EventStreams",
    "detected_rates",
    "accidental_rate",
    "dead_time_observed",
    "multiplex_summary",
    "simulate_event_streams",
    "count_coincidences",
]

EVENT_BUDGET = int(1e8)


@dataclass(frozen=True)
class CountingScenario:
    """Generation rate, efficiencies, timing and channel count of one setup."""

    generated_pair_rate: float
    eta_signal: float
    eta_idler: float
    coincidence_window_s: float = 1e-9
    dead_time_s: float = 0.0
    channels: int = 1
    pump_power_mw: float = 1.0

    def __post_init__(self):
        if self.generated_pair_rate < 0:
            raise ValueError("generated pair rate must be non-negative")
        for eta in (self.eta_signal, self.eta_idler):
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"efficiency {eta} outside (0, 1]")
        if self.coincidence_window_s < 0 or self.dead_time_s < 0:
            raise ValueError("window and dead time must be non-negative")
        if self.channels < 1:
            raise ValueError("channel count must be at least 1")
        if self.pump_power_mw <= 0:
            raise ValueError("pump power must be positive")

    @classmethod
    def from_brightness(cls, brightness_pairs_per_s_per_mw, pump_power_mw,
                        eta_signal, eta_idler, **kwargs):
        """Back-solve the generated rate from a detected, normalized brightness."""
        detected = brightness_pairs_per_s_per_mw * pump_power_mw
        generated = detected / (eta_signal * eta_idler)
        return cls(generated, eta_signal, eta_idler, pump_power_mw=pump_power_mw, **kwargs)

    @property
    def brightness_pairs_per_s_per_mw(self):
        """Detected coincidence rate normalized to pump power."""
        return self.generated_pair_rate * self.eta_signal * self.eta_idler / self.pump_power_mw


@dataclass(frozen=True)
class DetectedRates:
    singles_signal: float
    singles_idler: float
    coincidences: float
    pair_to_singles_signal: float
    pair_to_singles_idler: float


@dataclass(frozen=True)
class ChannelCounts:
    singles_signal: float
    singles_idler: float
    observed_singles_signal: float  # after per-detector dead time
    observed_singles_idler: float
    true_coincidences: float
    accidentals: float
    car: float


@dataclass(frozen=True)
class MultiplexSummary:
    channels: int
    per_channel: ChannelCounts
    total_singles_signal: float
    total_singles_idler: float
    total_true_coincidences: float
    total_accidentals: float
    car_total: float


def detected_rates(sc: CountingScenario) -> DetectedRates:
    """Singles, coincidences and pair-to-singles ratios before dead time.

    The pair-to-singles ratio of one arm equals the conjugate arm's
    collection efficiency, which is how that efficiency is estimated.
    """
    s_s = sc.generated_pair_rate * sc.eta_signal
    s_i = sc.generated_pair_rate * sc.eta_idler
    c = sc.generated_pair_rate * sc.eta_signal * sc.eta_idler
    return DetectedRates(s_s, s_i, c, c / s_s if s_s else 0.0, c / s_i if s_i else 0.0)


def accidental_rate(singles_signal, singles_idler, window_s):
    """Uncorrelated-singles accidental rate for the one-sided window [0, tau)."""
    if singles_signal < 0 or singles_idler < 0 or window_s < 0:
        raise ValueError("rates and window must be non-negative")
    return singles_signal * singles_idler * window_s


def dead_time_observed(rate_in, dead_time_s):
    """Non-paralyzable saturation R/(1 + R*tau_d); bounded by 1/tau_d."""
    if rate_in < 0 or dead_time_s < 0:
        raise ValueError("rate and dead time must be non-negative")
    return rate_in / (1.0 + rate_in * dead_time_s)


def multiplex_summary(sc: CountingScenario) -> MultiplexSummary:
    """Channelized rates for an even split into N matched channel pairs.

    Accidentals and CAR use the raw split singles (the factor-N algebra is
    exact there); the per-detector dead-time saturation is reported through
    the observed singles.
    """
    rates = detected_rates(sc)
    n = sc.channels
    ch_ss = rates.singles_signal / n
    ch_si = rates.singles_idler / n
    ch_true = rates.coincidences / n
    ch_acc = accidental_rate(ch_ss, ch_si, sc.coincidence_window_s)
    total_acc = ch_acc * n  # = S_s * S_i * tau / N
    car_ch = ch_true / ch_acc if ch_acc > 0 else np.inf
    return MultiplexSummary(
        channels=n,
        per_channel=ChannelCounts(
            singles_signal=ch_ss,
            singles_idler=ch_si,
            observed_singles_signal=dead_time_observed(ch_ss, sc.dead_time_s),
            observed_singles_idler=dead_time_observed(ch_si, sc.dead_time_s),
            true_coincidences=ch_true,
            accidentals=ch_acc,
            car=car_ch,
        ),
        total_singles_signal=rates.singles_signal,
        total_singles_idler=rates.singles_idler,
        total_true_coincidences=rates.coincidences,
        total_accidentals=total_acc,
        car_total=rates.coincidences / total_acc if total_acc > 0 else np.inf,
    )


@dataclass
class EventStreams:
    """Per-detector sorted timestamps (s): one signal and one idler stream per channel."""

    signal: list
    idler: list
    duration_s: float
    seed: int

    def __post_init__(self):
        for streams in (self.signal, self.idler):
            for t in streams:
                if len(t) > 1 and np.any(np.diff(t) <= 0):
                    raise ValueError("timestamps within a stream must be strictly increasing")
                if len(t) and (t[0] < 0 or t[-1] >= self.duration_s):
                    raise ValueError("timestamps must lie in [0, duration)")

    def to_csv(self, fh):
        fh.write("detector_id,timestamp_s\n")
        for c, t in enumerate(self.signal):
            for v in t:
                fh.write(f"signal_{c},{v:.12f}\n")
        for c, t in enumerate(self.idler):
            for v in t:
                fh.write(f"idler_{c},{v:.12f}\n")

    @classmethod
    def from_csv(cls, path, duration_s, seed=0):
        buckets = {}
        with open(path, "r", newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].startswith("#") or row[0] == "detector_id":
                    continue
                buckets.setdefault(row[0], []).append(float(row[1]))
        def collect(prefix):
            chans = sorted(k for k in buckets if k.startswith(prefix))
            return [np.sort(np.array(buckets[k])) for k in chans] or [np.array([])]
        return cls(collect("signal_"), collect("idler_"), duration_s, seed)


def _apply_dead_time(times, dead_time_s):
    if dead_time_s <= 0 or len(times) == 0:
        return times
    kept = np.empty(len(times))
    kept[0] = times[0]
    m = 1
    last = times[0]
    for t in times[1:]:
        if t - last >= dead_time_s:
            kept[m] = t
            m += 1
            last = t
    return kept[:m]


def simulate_event_streams(sc: CountingScenario, duration_s, seed, correlated=True):
    """Monte Carlo timestamp streams reproducing the scenario, fixed by seed.

    Pair births are homogeneous Poisson at the generated rate; each photon
    is kept with its arm's efficiency; each pair lands in one of N channels
    (both photons in the same, matched, channel); each detector then
    filters non-paralyzably.  With ``correlated=False`` the two arms are
    drawn as independent Poisson singles at the detected rates, which
    isolates the accidental-coincidence mechanism.
    """
    expected = sc.generated_pair_rate * duration_s * (1 + sc.eta_signal + sc.eta_idler)
    if expected > EVENT_BUDGET:
        raise ValueError(
            f"simulation would draw ~{expected:.2e} events, over the {EVENT_BUDGET:.0e} budget"
        )
    rng = np.random.default_rng(seed)
    n_ch = sc.channels

    if correlated:
        n_pairs = rng.poisson(sc.generated_pair_rate * duration_s)
        births = np.sort(rng.uniform(0.0, duration_s, n_pairs))
        channel = rng.integers(0, n_ch, n_pairs)
        keep_s = rng.random(n_pairs) < sc.eta_signal
        keep_i = rng.random(n_pairs) < sc.eta_idler
        signal = [births[keep_s & (channel == c)] for c in range(n_ch)]
        idler = [births[keep_i & (channel == c)] for c in range(n_ch)]
    else:
        rates = detected_rates(sc)
        signal, idler = [], []
        for c in range(n_ch):
            ns = rng.poisson(rates.singles_signal / n_ch * duration_s)
            ni = rng.poisson(rates.singles_idler / n_ch * duration_s)
            signal.append(np.sort(rng.uniform(0.0, duration_s, ns)))
            idler.append(np.sort(rng.uniform(0.0, duration_s, ni)))

    signal = [_apply_dead_time(_dedupe(t), sc.dead_time_s) for t in signal]
    idler = [_apply_dead_time(_dedupe(t), sc.dead_time_s) for t in idler]
    return EventStreams(signal, idler, duration_s, seed)


def _dedupe(times):
    # float64 duplicates are astronomically unlikely but would break the
    # strictly-increasing invariant
    if len(times) < 2:
        return times
    return times[np.concatenate([[True], np.diff(times) > 0])]


def _pair_channel(t_signal, t_idler, window_s):
    """Greedy earliest two-pointer pairing; each event used at most once."""
    a = b = 0
    n_s, n_i = len(t_signal), len(t_idler)
    count = 0
    while a < n_s and b < n_i:
        dt = t_idler[b] - t_signal[a]
        if 0.0 <= dt < window_s:
            count += 1
            a += 1
            b += 1
        elif dt < 0.0:
            b += 1
        else:
            a += 1
    return count


def count_coincidences(streams: EventStreams, window_s):
    """Coincidences within each matched channel pair: (total, per-channel list).

    A signal and an idler event coincide when t_i - t_s falls in
    [0, window); streams must be sorted strictly increasing.
    """
    if window_s < 0:
        raise ValueError("window must be non-negative")
    if len(streams.signal) != len(streams.idler):
        raise ValueError("signal and idler channel counts differ")
    for t in list(streams.signal) + list(streams.idler):
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("unsorted input: timestamps must be strictly increasing")
    per_channel = [
        _pair_channel(s, i, window_s) for s, i in zip(streams.signal, streams.idler)
    ]
    return sum(per_channel), per_channel
