from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from eophot.devices import (
    PAULI_X,
    PAULI_Z,
    DriveWaveform,
    MziCalibration,
    PcCalibration,
    Ringing,
    WaveplateSetting,
    canonical_voltages,
    mzi_mode_unitary,
    mzi_transmissivity,
    pc_stage_unitary,
    pc_unitary,
    theta_of_voltage,
    theta_trace,
    two_photon_mzi_amplitudes,
    voltage_of_theta,
    voltage_trace,
    waveplate_of_voltages,
)
from eophot.fock import StateVector, apply_mode_unitary

CAL = MziCalibration()


def same_up_to_phase(a, b, atol=1e-12):
    a, b = np.asarray(a), np.asarray(b)
    k = np.argmax(np.abs(b))
    phase = a.flat[k] / b.flat[k]
    return abs(abs(phase) - 1) < atol and np.allclose(a, phase * b, atol=atol)


@pytest.mark.parametrize("v,theta", [(-1.6, 0.0), (0.5, pi / 2), (2.6, pi)])
def test_theta_of_voltage_calibration_points(v, theta):
    assert theta_of_voltage(CAL, v) == pytest.approx(theta, abs=1e-12)
    assert voltage_of_theta(CAL, theta) == pytest.approx(v, abs=1e-12)


def test_v_pi_is_twice_the_quarter_span():
    assert CAL.v_pi == pytest.approx(4.2)


def test_identity_and_swap_routing():
    u_pi = mzi_mode_unitary(pi).matrix
    assert same_up_to_phase(u_pi @ [1, 0], [1, 0])
    u0 = mzi_mode_unitary(0.0).matrix
    assert same_up_to_phase(u0 @ [1, 0], [0, 1])


def test_balanced_point_splits_evenly():
    out = mzi_mode_unitary(pi / 2).matrix @ [1, 0]
    np.testing.assert_allclose(np.abs(out) ** 2, [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("theta", np.linspace(0, 2 * pi, 9))
def test_two_photon_amplitudes_match_fock_lift(theta):
    out = apply_mode_unitary(mzi_mode_unitary(theta), StateVector.from_fock((1, 1)))
    np.testing.assert_allclose(out.amplitudes, two_photon_mzi_amplitudes(theta), atol=1e-12)


def test_two_photon_amplitude_examples():
    np.testing.assert_allclose(two_photon_mzi_amplitudes(0.0), [0, -1, 0], atol=1e-15)
    np.testing.assert_allclose(two_photon_mzi_amplitudes(pi / 2), [1 / sqrt(2), 0, -1 / sqrt(2)], atol=1e-15)
    assert abs(two_photon_mzi_amplitudes(pi / 4)[1]) ** 2 == pytest.approx(0.5)


def test_imperfect_couplers_set_extinction():
    cal = MziCalibration(extinction_visibility=0.979)
    cross_peak = 1 - mzi_transmissivity(0.0, cal.coupler_ratio)
    assert cross_peak == pytest.approx(0.979, abs=1e-12)
    u = mzi_mode_unitary(0.3, cal.coupler_ratio).matrix
    assert abs(u[0, 0]) ** 2 == pytest.approx(mzi_transmissivity(0.3, cal.coupler_ratio), abs=1e-12)


def test_dc_waveform_is_constant():
    w = DriveWaveform("dc", (1.2,))
    t = np.linspace(-1e-6, 1e-6, 11)
    np.testing.assert_allclose(theta_trace(w, CAL, t), theta_of_voltage(CAL, 1.2))


def test_pulse_plateaus():
    w = DriveWaveform("pulse", (2.6, -1.6), duration=20e-9, rise_time=4e-9)
    assert theta_trace(w, CAL, -5e-9) == pytest.approx(pi)
    assert theta_trace(w, CAL, 12e-9) == pytest.approx(0.0, abs=1e-12)
    assert theta_trace(w, CAL, 40e-9) == pytest.approx(pi)


@pytest.mark.parametrize("rise", [1e-9, 4e-9, 7.5e-9])
def test_theta_edge_10_90_equals_rise_time(rise):
    w = DriveWaveform("pulse", (2.6, -1.6), duration=40e-9, rise_time=rise)
    t = np.linspace(-2e-9, rise * 2, 200001)
    th = theta_trace(w, CAL, t)
    frac = (th[0] - th) / (th[0] - th[-1])
    t10 = t[np.argmax(frac >= 0.1)]
    t90 = t[np.argmax(frac >= 0.9)]
    assert t90 - t10 == pytest.approx(rise, rel=1e-2)


def test_square_wave_levels_and_ringing_continuity():
    ring = Ringing(0.3, 100e6, 10e-9)
    w = DriveWaveform("square", (-1.6, 0.5), rise_time=4e-9, period=250e-9, ringing=ring)
    assert voltage_trace(w, 100e-9) == pytest.approx(-1.6, abs=2e-3)
    assert voltage_trace(w, 230e-9) == pytest.approx(0.5, abs=2e-3)
    # the ringing starts at zero amplitude, so the trace is continuous
    t = np.linspace(0, 250e-9, 50001)
    assert np.max(np.abs(np.diff(voltage_trace(w, t)))) < 1e-2


def test_waveform_validation():
    with pytest.raises(ValueError):
        DriveWaveform("pulse", (0, 1), duration=0)
    with pytest.raises(ValueError):
        DriveWaveform("square", (0,), period=1)
    with pytest.raises(ValueError):
        DriveWaveform("sine", (0,))


def test_waveplate_map_examples():
    zero = PcCalibration(0.1, 0.1, 0.0)
    assert waveplate_of_voltages(zero, 0, 0).retardance == 0
    assert waveplate_of_voltages(zero, 2.0, -2.0).axis_angle == pytest.approx(pi / 4)
    assert waveplate_of_voltages(zero, 3.0, 1.0).retardance == pytest.approx(sqrt(0.2**2 + 0.4**2))


def test_stage_unitary_examples():
    np.testing.assert_allclose(pc_stage_unitary(WaveplateSetting(0, 0.3)).matrix, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(pc_stage_unitary(WaveplateSetting(pi, pi / 4)).matrix, 1j * PAULI_X, atol=1e-15)
    np.testing.assert_allclose(pc_stage_unitary(WaveplateSetting(pi, 0)).matrix, 1j * PAULI_Z, atol=1e-15)


def test_stage_unitary_matches_matrix_exponential():
    rng = np.random.default_rng(4)
    for _ in range(20):
        r, phi = rng.uniform(0, 7), rng.uniform(0, pi)
        gen = PAULI_X * np.sin(2 * phi) + PAULI_Z * np.cos(2 * phi)
        np.testing.assert_allclose(
            pc_stage_unitary(WaveplateSetting(r, phi)).matrix, expm(0.5j * r * gen), atol=1e-12
        )


def test_four_quarter_stages_equal_one_half_wave():
    stage = pc_stage_unitary(WaveplateSetting(pi / 4, 0.2)).matrix
    np.testing.assert_allclose(
        np.linalg.matrix_power(stage, 4), pc_stage_unitary(WaveplateSetting(pi, 0.2)).matrix, atol=1e-12
    )


def test_zero_drive_without_offset_is_identity():
    np.testing.assert_allclose(pc_unitary(PcCalibration(0.1, 0.1, 0.0), 0, 0).matrix, np.eye(2), atol=1e-15)


@settings(max_examples=1000, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_pc_unitary_is_unitary_and_stagewise_consistent(v1, v2):
    cal = PcCalibration()
    u = pc_unitary(cal, v1, v2).matrix
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(u, pc_unitary(cal, v1, v2, stagewise=True).matrix, atol=1e-11)


@settings(max_examples=500, deadline=None)
@given(st.floats(-80, 80), st.floats(-80, 80))
def test_canonical_voltages_keep_the_unitary_and_fold_the_retardance(v1, v2):
    cal = PcCalibration()
    c1, c2 = canonical_voltages(cal, v1, v2)
    assert cal.stages * waveplate_of_voltages(cal, c1, c2).retardance <= pi + 1e-9
    u, c = pc_unitary(cal, v1, v2).matrix, pc_unitary(cal, c1, c2).matrix
    assert np.allclose(u, c, atol=1e-9) or np.allclose(u, -c, atol=1e-9)


def test_canonical_voltages_leave_small_drives_alone():
    assert canonical_voltages(PcCalibration(), 1.0, -2.0) == (1.0, -2.0)
