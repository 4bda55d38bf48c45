"""Electro-optic device models: the path-switching MZI and the polarization controller."""

from __future__ import annotations

from dataclasses import dataclass
from math import atan2, cos, pi, sin, sqrt

import numpy as np

from .fock import ModeUnitary

__all__ = [
    "MziCalibration",
    "Ringing",
    "DriveWaveform",
    "PcCalibration",
    "WaveplateSetting",
    "theta_of_voltage",
    "voltage_of_theta",
    "coupler",
    "mzi_mode_unitary",
    "mzi_transmissivity",
    "two_photon_mzi_amplitudes",
    "voltage_trace",
    "theta_trace",
    "waveplate_of_voltages",
    "pc_stage_unitary",
    "pc_unitary",
    "canonical_voltages",
    "PAULI_X",
    "PAULI_Z",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# a linear edge spans 10%..90% in 0.8 of its full width
EDGE_FULL_PER_10_90 = 1.0 / 0.8


@dataclass(frozen=True)
class MziCalibration:
    """Linear voltage-to-phase map through the cross (theta=0) and balanced (theta=pi/2) points.

    ``extinction_visibility`` is the peak cross-port transfer of the classical
    fringe (1 for ideal 50:50 couplers). Values below 1 are realized by
    detuning both couplers to the same power splitting ratio.
    """

    v_cross: float = -1.6
    v_balanced: float = 0.5
    extinction_visibility: float = 1.0

    def __post_init__(self):
        if self.v_cross == self.v_balanced:
            raise ValueError("v_cross and v_balanced must differ")
        if not 0.0 <= self.extinction_visibility <= 1.0:
            raise ValueError("extinction_visibility must lie in [0, 1]")

    @property
    def v_pi(self) -> float:
        """Voltage change for a pi change of the internal phase."""
        return 2.0 * (self.v_balanced - self.v_cross)

    @property
    def coupler_ratio(self) -> float:
        # 4 eta (1 - eta) = extinction, root on the eta <= 1/2 branch
        return 0.5 * (1.0 - sqrt(max(0.0, 1.0 - self.extinction_visibility)))


@dataclass(frozen=True)
class Ringing:
    """Exponentially damped sinusoid added after each drive edge."""

    amplitude: float = 0.0
    frequency: float = 100e6
    damping_time: float = 10e-9


@dataclass(frozen=True)
class DriveWaveform:
    """Voltage drive. ``levels`` holds ``(v,)`` for dc, ``(baseline, pulse)``
    for a pulse starting at t=0, and ``(first_half, second_half)`` for a
    square wave whose first half-period starts at t=0.

    ``rise_time`` is the 10-90% time of each linear edge.
    """

    kind: str
    levels: tuple
    duration: float = 0.0
    rise_time: float = 0.0
    period: float = 0.0
    ringing: Ringing | None = None

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.kind not in ("dc", "pulse", "square"):
            raise ValueError(f"unknown waveform kind {self.kind!r}")
        need = 1 if self.kind == "dc" else 2
        if len(self.levels) != need:
            raise ValueError(f"{self.kind} waveform needs {need} level(s)")
        if self.rise_time < 0:
            raise ValueError("rise_time must be >= 0")
        if self.kind == "pulse" and self.duration <= 0:
            raise ValueError("pulse duration must be > 0")
        if self.kind == "square" and self.period <= 0:
            raise ValueError("square period must be > 0")

    @property
    def edge_width(self) -> float:
        """Full 0-100% width of a linear edge."""
        return self.rise_time * EDGE_FULL_PER_10_90


def theta_of_voltage(cal: MziCalibration, v):
    """Internal MZI phase for drive voltage ``v`` (linear, unwrapped)."""
    return (pi / 2) * (np.asarray(v, dtype=float) - cal.v_cross) / (cal.v_balanced - cal.v_cross)


def voltage_of_theta(cal: MziCalibration, theta):
    return cal.v_cross + np.asarray(theta, dtype=float) * (cal.v_balanced - cal.v_cross) / (pi / 2)


def coupler(eta: float = 0.5) -> np.ndarray:
    """Directional coupler with power cross-coupling ``eta``."""
    t = sqrt(1.0 - eta)
    r = sqrt(eta)
    return np.array([[t, 1j * r], [1j * r, t]])


def mzi_mode_unitary(theta: float, coupler_ratio: float = 0.5) -> ModeUnitary:
    """Coupler, push-pull phase ``-/+ theta/2`` on the two arms, coupler.

    With ideal couplers this is ``-i [[s, -c], [-c, -s]]`` (``s = sin(theta/2)``,
    ``c = cos(theta/2)``): theta = pi routes straight through, theta = 0 swaps.
    """
    c = coupler(coupler_ratio)
    phase = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    return ModeUnitary(c @ phase @ c)


def mzi_transmissivity(theta, coupler_ratio: float = 0.5):
    """Bar-port (mode 0 -> mode 0) power transfer, vectorized over theta."""
    eta = coupler_ratio
    theta = np.asarray(theta, dtype=float)
    return (1 - eta) ** 2 + eta**2 - 2 * eta * (1 - eta) * np.cos(theta)


def two_photon_mzi_amplitudes(theta: float) -> np.ndarray:
    """Amplitudes of |11> after an ideal MZI, over (|20>, |11>, |02>)."""
    s = sin(theta)
    return np.array([s / sqrt(2), -cos(theta), -s / sqrt(2)], dtype=complex)


def _edge_shape(dt, width):
    if width <= 0:
        return (dt >= 0).astype(float)
    return np.clip(dt / width, 0.0, 1.0)


def _ringing_term(dt, width, ringing: Ringing):
    # starts once the edge is complete; sin keeps the voltage continuous
    tau = dt - width
    on = tau > 0
    tau = np.where(on, tau, 0.0)
    r = ringing.amplitude * np.exp(-tau / ringing.damping_time) * np.sin(2 * pi * ringing.frequency * tau)
    return np.where(on, r, 0.0)


def voltage_trace(w: DriveWaveform, t):
    """Drive voltage at times ``t`` (seconds), vectorized."""
    t = np.asarray(t, dtype=float)
    ring = w.ringing if (w.ringing is not None and w.ringing.amplitude != 0) else None
    width = w.edge_width
    if w.kind == "dc":
        return np.full_like(t, w.levels[0])

    if w.kind == "pulse":
        base, top = w.levels
        step = top - base
        v = base + step * (_edge_shape(t, width) - _edge_shape(t - w.duration, width))
        if ring is not None:
            v = v + np.sign(step) * (
                _ringing_term(t, width, ring) - _ringing_term(t - w.duration, width, ring)
            )
        return v

    # square: edges every half period, into levels[0] at even k, levels[1] at odd k
    first, second = w.levels
    half = 0.5 * w.period
    k = np.floor(t / half)
    dt = t - k * half
    even = (k % 2) == 0
    target = np.where(even, first, second)
    previous = np.where(even, second, first)
    v = previous + (target - previous) * _edge_shape(dt, width)
    if ring is not None:
        lookback = int(np.ceil((width + 12 * ring.damping_time) / half)) + 1
        for back in range(lookback):
            kk = k - back
            e = (kk % 2) == 0
            sign = np.where(e, np.sign(first - second), np.sign(second - first))
            v = v + sign * _ringing_term(t - kk * half, width, ring)
    return v


def theta_trace(w: DriveWaveform, cal: MziCalibration, t):
    """Internal phase seen by a photon crossing the MZI at time ``t``."""
    return theta_of_voltage(cal, voltage_trace(w, t))


@dataclass(frozen=True)
class PcCalibration:
    """Voltage map of the polarization controller.

    The difference channel ``v1 - v2`` drives the sigma_x axis and the sum
    channel ``v1 + v2`` the sigma_z axis, each with its own gain (radians of
    per-stage retardance per volt); ``offset_z`` is built-in birefringence.
    """

    gain_x: float = 0.05
    gain_z: float = 0.05
    offset_z: float = 0.2
    stages: int = 4

    def __post_init__(self):
        if self.stages < 1:
            raise ValueError("stages must be >= 1")
        if not all(np.isfinite([self.gain_x, self.gain_z, self.offset_z])):
            raise ValueError("gains must be finite")


@dataclass(frozen=True)
class WaveplateSetting:
    retardance: float
    axis_angle: float

    def __post_init__(self):
        if self.retardance < 0:
            raise ValueError("retardance must be >= 0")


def waveplate_of_voltages(cal: PcCalibration, v1: float, v2: float) -> WaveplateSetting:
    sx = cal.gain_x * (v1 - v2)
    sz = cal.gain_z * (v1 + v2) + cal.offset_z
    retardance = sqrt(sx * sx + sz * sz)
    axis = (0.5 * atan2(sx, sz)) % pi
    return WaveplateSetting(retardance, axis)


def _rotation(retardance: float, axis_angle: float) -> np.ndarray:
    n_sigma = PAULI_X * sin(2 * axis_angle) + PAULI_Z * cos(2 * axis_angle)
    half = 0.5 * retardance
    # exp(i a n.sigma) = cos a + i sin a n.sigma for a unit axis
    return cos(half) * np.eye(2) + 1j * sin(half) * n_sigma


def pc_stage_unitary(ws: WaveplateSetting) -> ModeUnitary:
    """Tunable waveplate ``exp[i (retardance/2)(sigma_x sin 2phi + sigma_z cos 2phi)]`` on (H, V)."""
    return ModeUnitary(_rotation(ws.retardance, ws.axis_angle))


def pc_unitary(cal: PcCalibration, v1: float, v2: float, stagewise: bool = False) -> ModeUnitary:
    """All stages wired in parallel to the same two voltages.

    Identical stages share one axis, so the product collapses to a single
    plate of ``stages`` times the retardance; ``stagewise=True`` multiplies
    the stages explicitly instead.
    """
    ws = waveplate_of_voltages(cal, v1, v2)
    if stagewise:
        stage = _rotation(ws.retardance, ws.axis_angle)
        return ModeUnitary(np.linalg.matrix_power(stage, cal.stages))
    return ModeUnitary(_rotation(cal.stages * ws.retardance, ws.axis_angle))


def canonical_voltages(cal: PcCalibration, v1: float, v2: float) -> tuple:
    """Voltages with the same PC unitary up to sign and total retardance in [0, pi].

    A rotation by ``r`` about ``n`` equals, up to a global phase, one by
    ``2 pi - r`` about ``-n``. Folding the drive back into ``[0, pi]`` keeps
    a controller away from ``r = 2 pi``, where every axis gives the identity
    and the voltage gradient vanishes.
    """
    if cal.gain_x == 0 or cal.gain_z == 0:
        return float(v1), float(v2)
    sx = cal.gain_x * (v1 - v2)
    sz = cal.gain_z * (v1 + v2) + cal.offset_z
    r = sqrt(sx * sx + sz * sz)
    period = 2 * pi / cal.stages
    if r <= period / 2:
        return float(v1), float(v2)
    folded = r % period
    if folded > period / 2:
        folded -= period
    sx, sz = sx * folded / r, sz * folded / r
    diff, total = sx / cal.gain_x, (sz - cal.offset_z) / cal.gain_z
    return 0.5 * (total + diff), 0.5 * (total - diff)
