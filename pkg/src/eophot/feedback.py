"""Closed-loop polarization alignment by gradient descent on coincidence counts.

A :class:`Plant` turns controller voltages into coincidence counts: photon 1
passes the polarization controller, meets photon 2 at a balanced splitter,
and the coincidences are Poisson sampled. The loop only ever sees counts.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from math import cos, pi, sin, sqrt

import numpy as np

from .devices import PcCalibration, canonical_voltages, pc_unitary
from .polarization import PolarizationState, coincidence_prob, from_jones, squared_overlap
from .source import CoincidenceSetup, DetectorModel, SourceModel, expected_rates, sample_counts

GOLDEN_ANGLE = pi * (3 - sqrt(5))

__all__ = [
    "Plant",
    "FeedbackConfig",
    "FeedbackRecord",
    "FeedbackTrace",
    "FeedbackDiverged",
    "measure_objective",
    "estimate_gradient",
    "run_loop",
]


@dataclass(frozen=True)
class Plant:
    """Simulated polarization-feedback experiment.

    ``drift`` maps an iteration index to the new state of photon 2 from that
    iteration on. ``noise=False`` returns expected counts instead of draws.
    """

    photon1: PolarizationState
    photon2: PolarizationState
    pc: PcCalibration = field(default_factory=PcCalibration)
    source: SourceModel = field(default_factory=SourceModel)
    detector1: DetectorModel = field(default_factory=DetectorModel)
    detector2: DetectorModel = field(default_factory=lambda: DetectorModel(efficiency=0.08))
    setup: CoincidenceSetup = field(default_factory=CoincidenceSetup)
    drift: dict = field(default_factory=dict)
    noise: bool = True

    def photon2_at(self, iteration: int) -> PolarizationState:
        current = self.photon2
        for it in sorted(self.drift):
            if it <= iteration:
                current = self.drift[it]
        return current

    def controlled_state(self, v1: float, v2: float) -> PolarizationState:
        u = pc_unitary(self.pc, v1, v2).matrix
        return from_jones(u @ self.photon1.jones)

    def polarization_overlap(self, v1: float, v2: float, iteration: int = 0) -> float:
        return squared_overlap(self.controlled_state(v1, v2), self.photon2_at(iteration))

    def coincidence_probability(self, v1: float, v2: float, iteration: int = 0) -> float:
        # spectral overlap scales the interference term of the polarization result
        p_pol = coincidence_prob(self.controlled_state(v1, v2), self.photon2_at(iteration))
        return 0.5 * (1.0 - self.source.max_overlap * (1.0 - 2.0 * p_pol))

    def rate(self, p_cc: float) -> float:
        return expected_rates(p_cc, self.source, self.detector1, self.detector2, self.setup).coincidences

    def expected_counts(self, v1: float, v2: float, time: float, iteration: int = 0) -> float:
        return self.rate(self.coincidence_probability(v1, v2, iteration)) * time

    def floor_counts(self, time: float) -> float:
        """Expected counts with perfectly aligned polarizations."""
        return self.rate(0.5 * (1.0 - self.source.max_overlap)) * time

    def reference_counts(self, time: float, rng: np.random.Generator | None = None):
        """Counts with the photons made distinguishable (no interference)."""
        mean = self.rate(0.5) * time
        if not self.noise or rng is None:
            return mean
        return sample_counts(mean / time, time, rng)


def measure_objective(plant: Plant, v1: float, v2: float, integration_time: float, rng=None, iteration: int = 0):
    """Coincidence counts at controller voltages ``(v1, v2)``."""
    mean_rate = plant.rate(plant.coincidence_probability(v1, v2, iteration))
    if not plant.noise or rng is None:
        return mean_rate * integration_time
    return sample_counts(mean_rate, integration_time, rng)


@dataclass(frozen=True)
class FeedbackConfig:
    probe_delta: float = 1.0
    learn_rate: float = 12.0
    max_iters: int = 50
    integration_time: float = 4.0
    stop_threshold: float | None = None
    stop_patience: int = 1
    backtrack: bool = True
    noise_sigmas: float = 2.0
    lr_growth: float = 1.5
    max_lr_factor: float = 4.0
    escape_threshold: float | None = None
    stall_patience: int = 6
    escape_step: float = 8.0
    fold_voltages: bool = True
    momentum: float = 0.5

    def __post_init__(self):
        if self.probe_delta <= 0:
            raise ValueError("probe_delta must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.integration_time <= 0:
            raise ValueError("integration_time must be > 0")
        if self.learn_rate <= 0:
            raise ValueError("learn_rate must be > 0")
        if self.stop_patience < 1:
            raise ValueError("stop_patience must be >= 1")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        if self.stall_patience < 1:
            raise ValueError("stall_patience must be >= 1")


@dataclass(frozen=True)
class FeedbackRecord:
    iteration: int
    role: str
    v1: float
    v2: float
    counts: float
    normalized: float
    expected_normalized: float


@dataclass
class FeedbackTrace:
    records: list = field(default_factory=list)
    reference_counts: float = 0.0
    updates: int = 0
    stopped: bool = False
    floor: float = 0.0

    def centers(self) -> list:
        return [r for r in self.records if r.role == "center"]

    def to_csv(self, run: int | None = None) -> str:
        buf = io.StringIO()
        write_trace_rows(buf, [(run, self)], header=True)
        return buf.getvalue()


TRACE_COLUMNS = ["run", "iteration", "role", "v1_V", "v2_V", "counts", "normalized", "expected_normalized"]


def write_trace_rows(fh, traces, header: bool = True):
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(TRACE_COLUMNS)
    for run, trace in traces:
        for r in trace.records:
            w.writerow(
                ["" if run is None else run, r.iteration, r.role, repr(r.v1), repr(r.v2),
                 repr(float(r.counts)) if isinstance(r.counts, float) else r.counts,
                 repr(r.normalized), repr(r.expected_normalized)]
            )


class FeedbackDiverged(RuntimeError):
    def __init__(self, message: str, trace: FeedbackTrace):
        super().__init__(message)
        self.trace = trace


def estimate_gradient(plant: Plant, v1: float, v2: float, cfg: FeedbackConfig, rng=None,
                      reference: float = 1.0, iteration: int = 0, records: list | None = None):
    """Central-difference gradient of the normalized objective, per volt.

    Four fresh probe measurements; counts are divided by ``reference`` so the
    estimate does not scale with integration time.
    """
    d = cfg.probe_delta
    T = cfg.integration_time
    grads = []
    for axis in (0, 1):
        pair = []
        for sign in (+1, -1):
            p = [v1, v2]
            p[axis] += sign * d
            n = measure_objective(plant, p[0], p[1], T, rng, iteration)
            pair.append(n)
            if records is not None:
                records.append(_record(plant, iteration, "probe", p[0], p[1], n, reference, T))
        grads.append((pair[0] - pair[1]) / (2 * d * reference))
    return grads[0], grads[1]


def _record(plant, iteration, role, v1, v2, n, reference, T):
    expected = plant.expected_counts(v1, v2, T, iteration) / _expected_reference(plant, T)
    return FeedbackRecord(iteration, role, float(v1), float(v2), n, float(n) / reference, expected)


def _expected_reference(plant: Plant, T: float) -> float:
    return plant.rate(0.5) * T


def run_loop(plant: Plant, cfg: FeedbackConfig, start=(0.0, 0.0), rng=None) -> FeedbackTrace:
    """Gradient descent on the normalized coincidence objective.

    Each iteration measures the current point; while the objective is above
    ``stop_threshold`` it probes the gradient and takes a heavy-ball step
    ``u = momentum * u - lr * g; v += u``. A
    measured increase larger than the noise band (zero without noise) rejects
    the previous step and halves the learning rate. Falling below the
    threshold on ``stop_patience`` consecutive iterations ends the loop; a
    threshold of ``None`` keeps tracking until ``max_iters``.

    The voltage landscape has spurious local minima. With ``escape_threshold``
    set, a run whose best objective has not improved for ``stall_patience``
    iterations while still above the threshold jumps by ``escape_step`` volts,
    turning the jump direction by the golden angle each time.
    ``fold_voltages`` maps each new point to its equivalent drive with total
    retardance at most pi (see ``canonical_voltages``).
    """
    T = cfg.integration_time
    noisy = plant.noise and rng is not None
    ref = plant.reference_counts(T, rng if noisy else None)
    ref = max(float(ref), 1.0)
    trace = FeedbackTrace(reference_counts=ref, floor=plant.floor_counts(T) / _expected_reference(plant, T))

    v = np.array(start, dtype=float)
    lr = cfg.learn_rate
    accepted = None  # (v, counts, grad) of the last accepted point
    velocity = np.zeros(2)
    below = 0
    initial = None
    bad = 0
    active_photon2 = plant.photon2_at(0)
    best, best_it, escapes = np.inf, 0, 0

    for it in range(cfg.max_iters):
        p2 = plant.photon2_at(it)
        if p2 != active_photon2:
            # the landscape moved; old comparisons are void
            active_photon2 = p2
            accepted = None
            velocity = np.zeros(2)
            lr = cfg.learn_rate
            initial, bad = None, 0
            best, best_it = np.inf, it
        if cfg.fold_voltages:
            folded = np.array(canonical_voltages(plant.pc, v[0], v[1]))
            if not np.array_equal(folded, v):
                v, velocity = folded, np.zeros(2)
        n = measure_objective(plant, v[0], v[1], T, rng, it)
        trace.records.append(_record(plant, it, "center", v[0], v[1], n, ref, T))
        obj = float(n) / ref

        if initial is None:
            initial = (obj, sqrt(max(float(n), 1.0)) / ref)
        if noisy and obj > initial[0] + 5 * initial[1]:
            bad += 1
            if bad >= 5:
                raise FeedbackDiverged(
                    f"objective {obj:.4g} above initial {initial[0]:.4g} + 5 sigma for 5 iterations",
                    trace,
                )
        else:
            bad = 0

        band = 2 * sqrt(max(float(n), 1.0)) / ref if noisy else 1e-9 * obj
        if obj < best - band:
            best, best_it = obj, it
        elif cfg.escape_threshold is not None and best > cfg.escape_threshold and it - best_it >= cfg.stall_patience:
            angle = escapes * GOLDEN_ANGLE
            v = v + cfg.escape_step * np.array([cos(angle), sin(angle)])
            escapes += 1
            best, best_it = np.inf, it + 1
            accepted, velocity = None, np.zeros(2)
            lr = cfg.learn_rate
            trace.updates += 1
            continue

        if cfg.backtrack and accepted is not None:
            v_prev, n_prev, g_prev = accepted
            tol = cfg.noise_sigmas * sqrt(float(n_prev) + float(n)) / ref if noisy else 0.0
            if obj > float(n_prev) / ref + tol:
                lr *= 0.5
                velocity = np.zeros(2)
                v = v_prev - lr * g_prev
                trace.updates += 1
                continue

        if cfg.stop_threshold is not None and obj < cfg.stop_threshold:
            below += 1
            if below >= cfg.stop_patience:
                trace.stopped = True
                break
            accepted = (v.copy(), n, np.zeros(2))
            continue
        below = 0

        g = np.array(estimate_gradient(plant, v[0], v[1], cfg, rng, ref, it, trace.records))
        if accepted is not None:
            lr = min(lr * cfg.lr_growth, cfg.learn_rate * cfg.max_lr_factor)
        accepted = (v.copy(), n, g)
        velocity = cfg.momentum * velocity - lr * g
        v = v + velocity
        trace.updates += 1
    return trace


def noiseless(plant: Plant) -> Plant:
    return replace(plant, noise=False)
