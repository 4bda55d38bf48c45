"""Photon-pair source, detectors, coincidence counting and Poisson sampling."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from math import log, pi, sqrt
from typing import NamedTuple

import numpy as np

from .devices import DriveWaveform, MziCalibration, mzi_transmissivity, theta_trace

__all__ = [
    "SPEED_OF_LIGHT",
    "DOUBLE_PAIR_COINCIDENCE_FACTOR",
    "SourceModel",
    "DetectorModel",
    "CoincidenceSetup",
    "Rates",
    "SwitchRates",
    "stream",
    "coherence_time",
    "overlap_vs_delay",
    "expected_rates",
    "sample_counts",
    "switch_port_probabilities",
    "heralded_switch_rates",
    "heralded_switch_trial",
]

SPEED_OF_LIGHT = 299_792_458.0

# Two pairs in one pulse, treated as four mutually distinguishable photons:
# C(4, 2) photon pairs, each split across the outputs with probability 1/2.
DOUBLE_PAIR_COINCIDENCE_FACTOR = 3.0


@dataclass(frozen=True)
class SourceModel:
    rep_rate: float = 80e6
    pair_prob: float = 1.1e-4
    double_pair_prob: float = 0.0
    center_wavelength: float = 1550e-9
    filter_fwhm: float = 10e-9
    max_overlap: float = 0.95

    def __post_init__(self):
        if not 0.0 <= self.double_pair_prob <= self.pair_prob <= 1.0:
            raise ValueError("need 0 <= double_pair_prob <= pair_prob <= 1")
        if self.filter_fwhm <= 0:
            raise ValueError("filter_fwhm must be > 0")
        if not 0.0 <= self.max_overlap <= 1.0:
            raise ValueError("max_overlap must lie in [0, 1]")
        if self.rep_rate <= 0:
            raise ValueError("rep_rate must be > 0")


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 0.18
    dark_rate: float = 1e3
    jitter_fwhm: float = 60e-12

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if self.dark_rate < 0:
            raise ValueError("dark_rate must be >= 0")
        if self.jitter_fwhm < 0:
            raise ValueError("jitter_fwhm must be >= 0")


@dataclass(frozen=True)
class CoincidenceSetup:
    window: float = 1e-9
    integration_time: float = 1.0
    channel_loss: tuple = (0.2, 0.2)

    def __post_init__(self):
        object.__setattr__(self, "channel_loss", tuple(float(x) for x in self.channel_loss))
        if self.window <= 0:
            raise ValueError("window must be > 0")
        if self.integration_time <= 0:
            raise ValueError("integration_time must be > 0")
        if len(self.channel_loss) != 2 or not all(0.0 <= x <= 1.0 for x in self.channel_loss):
            raise ValueError("channel_loss needs two transmissions in [0, 1]")


class Rates(NamedTuple):
    singles1: float
    singles2: float
    coincidences: float


def stream(seed: int, *key) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``; string keys are hashed with crc32."""
    spawn = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn))


def coherence_time(src: SourceModel) -> float:
    """Gaussian width (std, seconds) of the two-photon overlap versus delay.

    The filter FWHM in wavelength converts to a frequency std
    ``sigma_nu = c * dlambda / lambda^2 / (2 sqrt(2 ln 2))``. For frequency
    anticorrelated pair photons the interference term carries ``2 sigma_nu``,
    giving ``sigma_tau = 1 / (4 pi sigma_nu)``.
    """
    sigma_nu = SPEED_OF_LIGHT * src.filter_fwhm / src.center_wavelength**2 / (2 * sqrt(2 * log(2)))
    return 1.0 / (4 * pi * sigma_nu)


def overlap_vs_delay(src: SourceModel, delay):
    tau = coherence_time(src)
    return src.max_overlap * np.exp(-np.asarray(delay, dtype=float) ** 2 / (2 * tau * tau))


def expected_rates(
    p_cc: float,
    src: SourceModel,
    d1: DetectorModel,
    d2: DetectorModel,
    setup: CoincidenceSetup,
) -> Rates:
    """Singles and coincidence rates (Hz) for a pair coincidence probability ``p_cc``.

    Photons only arrive with laser pulses, and pulses are spaced wider than
    the window, so photon-photon accidentals come from double pairs within
    one pulse. Dark counts are uniform in time and pair with anything.
    """
    p_arr = np.asarray(p_cc, dtype=float)
    if np.any(p_arr < -1e-12) or np.any(p_arr > 1.0 + 1e-12):
        raise ValueError("p_cc must lie in [0, 1]")
    # clip roundoff from upstream unitary algebra
    p_arr = np.clip(p_arr, 0.0, 1.0)
    p_cc = p_arr if p_arr.ndim else float(p_arr)
    t1, t2 = setup.channel_loss
    e1 = d1.efficiency * t1
    e2 = d2.efficiency * t2
    photons_per_pulse = src.pair_prob + src.double_pair_prob
    s1 = src.rep_rate * photons_per_pulse * e1 + d1.dark_rate
    s2 = src.rep_rate * photons_per_pulse * e2 + d2.dark_rate
    true_cc = src.rep_rate * src.pair_prob * e1 * e2 * p_cc
    # s1 s2 w minus the photon-photon product, which cannot fall in one window
    accidental = (s1 * s2 - (s1 - d1.dark_rate) * (s2 - d2.dark_rate)) * setup.window
    accidental += src.rep_rate * src.double_pair_prob * e1 * e2 * DOUBLE_PAIR_COINCIDENCE_FACTOR
    return Rates(s1, s2, true_cc + accidental)


def sample_counts(rate, time: float, rng: np.random.Generator):
    """Poisson counts with mean ``rate * time``; array in, array out."""
    rate = np.asarray(rate, dtype=float)
    if np.any(rate < 0) or time < 0:
        raise ValueError("rate and time must be non-negative")
    out = rng.poisson(rate * time)
    return int(out) if rate.ndim == 0 else out


def _jitter_nodes(jitter_fwhm: float, order: int = 24):
    if jitter_fwhm <= 0:
        return np.zeros(1), np.ones(1)
    sigma = jitter_fwhm / (2 * sqrt(2 * log(2)))
    x, w = np.polynomial.hermite_e.hermegauss(order)
    return sigma * x, w / w.sum()


def switch_port_probabilities(delay, w: DriveWaveform, cal: MziCalibration, jitter_fwhm: float = 0.0):
    """Mean (bar, cross) routing probabilities of a photon arriving ``delay``
    after the drive pulse starts, averaged over Gaussian timing jitter."""
    delay = np.atleast_1d(np.asarray(delay, dtype=float))
    offsets, weights = _jitter_nodes(jitter_fwhm)
    t = delay[:, None] + offsets[None, :]
    bar = mzi_transmissivity(theta_trace(w, cal, t), cal.coupler_ratio) @ weights
    return bar, 1.0 - bar


@dataclass(frozen=True)
class SwitchRates:
    herald: float
    bar: np.ndarray
    cross: np.ndarray


def heralded_switch_rates(
    delay,
    w: DriveWaveform,
    cal: MziCalibration,
    src: SourceModel,
    herald: DetectorModel,
    port: DetectorModel,
    setup: CoincidenceSetup,
) -> SwitchRates:
    """Expected herald-gated count rates at both MZI outputs.

    The herald detector is channel 1; the signal photon passes channel 2 and
    the MZI, and each output port carries a copy of ``port``.
    """
    t_h, t_s = setup.channel_loss
    herald_rate = src.rep_rate * src.pair_prob * herald.efficiency * t_h + herald.dark_rate
    true = src.rep_rate * src.pair_prob * herald.efficiency * t_h * t_s * port.efficiency
    bar, cross = switch_port_probabilities(delay, w, cal, np.hypot(herald.jitter_fwhm, port.jitter_fwhm))
    single_port = src.rep_rate * src.pair_prob * t_s * port.efficiency
    # accidentals need a dark count on at least one side
    herald_dark = herald.dark_rate * setup.window
    bar_rate = true * bar + (herald_rate * port.dark_rate * setup.window + herald_dark * single_port * bar)
    cross_rate = true * cross + (herald_rate * port.dark_rate * setup.window + herald_dark * single_port * cross)
    return SwitchRates(herald_rate, bar_rate, cross_rate)


def heralded_switch_trial(
    delay,
    w: DriveWaveform,
    cal: MziCalibration,
    src: SourceModel,
    herald: DetectorModel,
    port: DetectorModel,
    setup: CoincidenceSetup,
    rng: np.random.Generator | None = None,
):
    """Herald-gated counts (bar, cross) over ``setup.integration_time``.

    Without ``rng`` the expected counts are returned.
    """
    rates = heralded_switch_rates(delay, w, cal, src, herald, port, setup)
    T = setup.integration_time
    if rng is None:
        return rates.bar * T, rates.cross * T
    return sample_counts(rates.bar, T, rng), sample_counts(rates.cross, T, rng)
