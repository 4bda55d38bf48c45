"""Simulation of electro-optic photonic switching and two-photon interference.

Modules
-------
fock          Fock-space evolution of multi-photon states under linear optics.
devices       Electro-optic Mach-Zehnder switch and polarization controller models.
polarization  Two-photon polarization interference, its gradient and stationary points.
source        Pair source, detector and coincidence rate models with seeded sampling.
feedback      Gradient-descent polarization alignment on counted coincidences.
fitting       Sinusoid, dip and forward-model least-squares fits.
scenarios     Seeded experiment scenarios with CSV output; see also ``eophot.cli``.
"""

from .config import SCENARIOS, ConfigError, ScenarioConfig, load_config
from .devices import (
    DriveWaveform,
    MziCalibration,
    PcCalibration,
    Ringing,
    mzi_mode_unitary,
    mzi_transmissivity,
    pc_unitary,
    theta_of_voltage,
    voltage_of_theta,
    voltage_trace,
)
from .feedback import FeedbackConfig, FeedbackDiverged, Plant, run_loop
from .fitting import FitResult, fit_dip, fit_model, fit_poisson, fit_squared_sinusoid
from .fock import (
    FockState,
    ModeUnitary,
    StateVector,
    apply_mode_unitary,
    beamsplitter,
    detection_probability,
    permanent,
    two_photon_coincidence_prob,
)
from .polarization import (
    PolarizationState,
    Stationary,
    StationaryPointError,
    classify_stationary,
    coincidence_grad,
    coincidence_prob,
    squared_overlap,
)
from .scenarios import RunResult, run_scenario
from .source import CoincidenceSetup, DetectorModel, SourceModel, expected_rates, overlap_vs_delay

__version__ = "0.1.0"


__all__ = [
    "SCENARIOS",
    "ConfigError",
    "ScenarioConfig",
    "load_config",
    "DriveWaveform",
    "MziCalibration",
    "PcCalibration",
    "Ringing",
    "mzi_mode_unitary",
    "mzi_transmissivity",
    "pc_unitary",
    "theta_of_voltage",
    "voltage_of_theta",
    "voltage_trace",
    "FeedbackConfig",
    "FeedbackDiverged",
    "Plant",
    "run_loop",
    "FitResult",
    "fit_dip",
    "fit_model",
    "fit_poisson",
    "fit_squared_sinusoid",
    "FockState",
    "ModeUnitary",
    "StateVector",
    "apply_mode_unitary",
    "beamsplitter",
    "detection_probability",
    "permanent",
    "two_photon_coincidence_prob",
    "PolarizationState",
    "Stationary",
    "StationaryPointError",
    "classify_stationary",
    "coincidence_grad",
    "coincidence_prob",
    "squared_overlap",
    "RunResult",
    "run_scenario",
    "CoincidenceSetup",
    "DetectorModel",
    "SourceModel",
    "expected_rates",
    "overlap_vs_delay",
]
