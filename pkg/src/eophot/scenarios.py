"""Seeded experiment scenarios producing CSV datasets and fitted summaries.

Every scenario is a pure function of its :class:`ScenarioConfig`. Sweep
point ``i`` draws from its own stream ``(seed, scenario, i)``, so results do
not depend on evaluation order, and nothing is written until the whole run
has been computed.
"""

from __future__ import annotations

import csv
import io
import os
import shutil
import tempfile
from dataclasses import dataclass, field, replace
from math import pi
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, minimize

from .config import ConfigError, ScenarioConfig
from .devices import mzi_transmissivity, pc_unitary, theta_of_voltage, theta_trace, voltage_of_theta
from .feedback import (
    FeedbackConfig,
    FeedbackDiverged,
    Plant,
    run_loop,
    write_trace_rows,
)
from .fitting import fit_dip, fit_model, fit_poisson, fit_squared_sinusoid
from .polarization import PolarizationState
from .source import expected_rates, heralded_switch_rates, overlap_vs_delay, stream, switch_port_probabilities

__all__ = [
    "RunResult",
    "run_scenario",
    "write_outputs",
    "solve_fringe_overlap",
    "solve_double_pair_prob",
    "stokes_rotation",
    "fit_pc_surface",
    "fast_hom_gate_terms",
    "feedback_runs",
    "REPORTED_FEEDBACK_ITERATIONS",
]

# iterations the reported loop needed to restore the overlap
REPORTED_FEEDBACK_ITERATIONS = 4.0


@dataclass
class RunResult:
    scenario: str
    files: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)

    def value(self, quantity: str) -> float:
        return self.summary[quantity][0]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _summary_csv(summary: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "value", "uncertainty", "unit"])
    for name, (value, unc, unit) in summary.items():
        w.writerow([name, _fmt(value), _fmt(unc), unit])
    return buf.getvalue()


def _counts(expected, cfg: ScenarioConfig, tag: str):
    """Per-point Poisson draws, or the expectation itself with noise off."""
    expected = np.asarray(expected, dtype=float)
    if not cfg.noise:
        return expected
    flat = expected.reshape(expected.shape[0], -1)
    out = np.empty(flat.shape, dtype=np.int64)
    for i in range(flat.shape[0]):
        out[i] = stream(cfg.seed, cfg.scenario, tag, i).poisson(flat[i])
    return out.reshape(expected.shape)


# ---------------------------------------------------------------- switching


def _switch_response(cfg: ScenarioConfig) -> RunResult:
    cal = cfg.mzi()
    duration = cfg.num("drive.pulse_duration")
    w = cfg.waveform("pulse", (float(voltage_of_theta(cal, pi)), cal.v_cross), duration=duration)
    delays = cfg.sweep("delay")
    src, herald, port = cfg.source(), cfg.detector(1), cfg.detector(2)
    setup = cfg.coincidence()
    T = setup.integration_time
    rates = heralded_switch_rates(delays, w, cal, src, herald, port, setup)
    expected = np.column_stack([rates.bar * T, rates.cross * T])
    counts = _counts(expected, cfg, "ports")
    bar, cross = counts[:, 0], counts[:, 1]

    margin = cfg.num("plateau_margin")
    plateau = (delays >= w.edge_width + margin) & (delays <= duration - margin)
    if plateau.sum() < 1:
        raise ConfigError(f"{cfg.scenario}.plateau_margin", "no sweep points on the pulse plateau")
    n_cross = float(np.sum(cross[plateau]))
    n_total = n_cross + float(np.sum(bar[plateau]))
    eff = n_cross / n_total
    eff_err = float(np.sqrt(eff * (1 - eff) / n_total))

    jitter = float(np.hypot(herald.jitter_fwhm, port.jitter_fwhm))
    x_ns = delays * 1e9

    def model(x, scale, t0, rise, bg):
        ww = replace(w, rise_time=abs(rise) * 1e-9)
        return scale * switch_port_probabilities((x - t0) * 1e-9, ww, cal, jitter)[1] + bg

    p0 = [float(np.max(cross)), 0.0, 3.0, float(np.min(cross))]
    names = ["scale", "t0", "rise_time", "background"]
    fit = fit_poisson(lambda x, y, weights: fit_model(model, x, y, p0, names, weights, kind="switch_edge"),
                      x_ns, cross)
    rise = abs(fit.params["rise_time"])
    # 10-90 % of the fitted count response on the leading edge
    fine = np.linspace(-2, 2 + 2 * rise, 4001)
    resp = model(fine + fit.params["t0"], *[fit.params[k] for k in ("scale", "t0", "rise_time", "background")])
    lo, hi = resp[0], resp[-1]
    frac = (resp - lo) / (hi - lo)
    count_10_90 = float(np.interp(0.9, frac, fine) - np.interp(0.1, frac, fine))

    summary = {
        "switching_efficiency": (eff, eff_err, "1"),
        "rise_time_fit": (rise, fit.errors["rise_time"], "ns"),
        "edge_offset_fit": (fit.params["t0"], fit.errors["t0"], "ns"),
        "count_transition_10_90": (count_10_90, 0.0, "ns"),
        "plateau_points": (int(plateau.sum()), 0, "1"),
        "plateau_counts": (n_total, float(np.sqrt(n_total)), "counts"),
    }
    rows = zip(x_ns, bar, cross, expected[:, 0], expected[:, 1])
    files = {
        "switch_response.csv": _csv(
            ["delay_ns", "bar_counts", "cross_counts", "expected_bar_counts", "expected_cross_counts"], rows)
    }
    data = {"delay": delays, "bar": bar, "cross": cross, "expected": expected, "plateau": plateau}
    return RunResult(cfg.scenario, files, summary, data, {"edge": fit})


# ---------------------------------------------------------------- fringes


def _fringe_extremes(cal, m: float):
    """Min and max of T^2 + R^2 - 2 T R m over the reachable MZI transmissivities."""
    e = cal.extinction_visibility
    t_lo = 1.0 - e
    reach_half = t_lo <= 0.5
    p = lambda t: t * t + (1 - t) ** 2 - 2 * t * (1 - t) * m
    p_min = p(0.5) if reach_half else p(t_lo)
    p_max = max(p(1.0), p(t_lo))
    return p_min, p_max


def solve_fringe_overlap(target: float, cal, src, d1, d2, setup) -> float:
    """Zero-delay overlap giving two-photon fringe visibility ``target``."""

    def vis(m):
        lo, hi = _fringe_extremes(cal, m)
        r = expected_rates(np.array([lo, hi]), replace(src, max_overlap=m), d1, d2, setup).coincidences
        return (r[1] - r[0]) / (r[1] + r[0])

    if not vis(0.0) <= target <= vis(1.0):
        raise ConfigError("fringes.target_visibility",
                          f"target {target} outside reachable range [{vis(0.0):.4f}, {vis(1.0):.4f}]")
    return float(brentq(lambda m: vis(m) - target, 0.0, 1.0, xtol=1e-15, rtol=1e-15))


def _fringes(cfg: ScenarioConfig) -> RunResult:
    cal = cfg.mzi()
    d1, d2 = cfg.detector(1), cfg.detector(2)
    setup = cfg.coincidence()
    T = setup.integration_time
    if cfg.get("source.max_overlap") == "auto":
        base = cfg.source(max_overlap=1.0)
        m = solve_fringe_overlap(cfg.num("target_visibility"), cal, base, d1, d2, setup)
        src = replace(base, max_overlap=m)
    else:
        src = cfg.source()
    volts = cfg.sweep("voltage")
    trans = mzi_transmissivity(theta_of_voltage(cal, volts), cal.coupler_ratio)
    refl = 1.0 - trans
    # bright-light fringe: attenuated laser intensity at one output
    classical = cfg.num("bright_peak_counts") * trans
    p_cc = trans**2 + refl**2 - 2 * trans * refl * src.max_overlap
    cc_rate = expected_rates(p_cc, src, d1, d2, setup).coincidences
    expected = np.column_stack([classical, cc_rate * T])
    counts = _counts(expected, cfg, "fringe")
    classical, coinc = counts[:, 0], counts[:, 1]

    fit_c = fit_poisson(fit_squared_sinusoid, volts, classical)
    fit_2 = fit_poisson(fit_squared_sinusoid, volts, coinc)
    pc_, pc_err = fit_c.params["period"], fit_c.errors["period"]
    p2, p2_err = fit_2.params["period"], fit_2.errors["period"]
    ratio = pc_ / p2
    ratio_err = ratio * float(np.hypot(pc_err / pc_, p2_err / p2))
    v2 = fit_2.visibility
    summary = {
        "classical_period": (pc_, pc_err, "V"),
        "two_photon_period": (p2, p2_err, "V"),
        "period_ratio": (ratio, ratio_err, "1"),
        "classical_visibility": (fit_c.visibility, fit_c.visibility_err, "1"),
        "two_photon_visibility": (v2, fit_2.visibility_err, "1"),
        "max_overlap": (src.max_overlap, 0.0, "1"),
        # invert V = (1 + m) / (3 - m), accidentals neglected
        "hom_visibility_from_fringe": ((3 * v2 - 1) / (1 + v2), 4 * fit_2.visibility_err / (1 + v2) ** 2, "1"),
    }
    rows = zip(volts, classical, coinc, expected[:, 0], expected[:, 1])
    files = {
        "fringes.csv": _csv(
            ["voltage_V", "classical_counts", "coincidence_counts",
             "expected_classical_counts", "expected_coincidence_counts"], rows)
    }
    data = {"voltage": volts, "classical": classical, "coincidences": coinc, "expected": expected, "source": src}
    return RunResult(cfg.scenario, files, summary, data, {"classical": fit_c, "two_photon": fit_2})


# ---------------------------------------------------------------- fast HOM


def fast_hom_gate_terms(w, cal, rep_rate: float, pulse_phase: float, n_uniform: int = 4000):
    """Per-counter ``(a, b, fraction)`` with gated coincidence probability ``a - b m``.

    Photons arrive with the laser pulses; when the drive period is a whole
    number of pulse spacings the arrival phases are fixed, otherwise they are
    spread uniformly over the period. Counter 1 gates the first half-period.
    """
    period = w.period
    n_pulses = period * rep_rate
    if abs(n_pulses - round(n_pulses)) < 1e-9 and round(n_pulses) >= 2:
        times = (pulse_phase + np.arange(int(round(n_pulses))) / rep_rate) % period
    else:
        times = (np.arange(n_uniform) + 0.5) / n_uniform * period
    t = mzi_transmissivity(theta_trace(w, cal, times), cal.coupler_ratio)
    r = 1.0 - t
    gate1 = times < period / 2
    out = []
    for gate in (gate1, ~gate1):
        a = float(np.mean(t[gate] ** 2 + r[gate] ** 2))
        b = float(np.mean(2 * t[gate] * r[gate]))
        out.append((a, b, float(gate.mean())))
    return out


def _fast_hom(cfg: ScenarioConfig) -> RunResult:
    cal = cfg.mzi()
    src, d1, d2 = cfg.source(), cfg.detector(1), cfg.detector(2)
    setup = cfg.coincidence()
    T = setup.integration_time
    w = cfg.waveform("square", (cal.v_cross, cal.v_balanced), period=1.0 / cfg.num("drive.square_frequency"))
    gates = fast_hom_gate_terms(w, cal, src.rep_rate, cfg.num("pulse_phase"))
    delays = cfg.sweep("delay")
    m = overlap_vs_delay(src, delays)
    expected = np.column_stack([
        frac * expected_rates(a - b * m, src, d1, d2, setup).coincidences * T for a, b, frac in gates
    ])
    counts = _counts(expected, cfg, "counters")
    x_ps = delays * 1e12
    fits = {}
    summary = {}
    # both counters see the same photons, so the interfering counter fixes
    # the dip position and width for the other one
    shape = fit_poisson(fit_dip, x_ps, counts[:, 1])
    x0, width = shape.params["center"], shape.params["width"]

    def fixed_shape(x, y, weights):
        g = lambda x, b, v: b * (1 - v * np.exp(-((x - x0) ** 2) / (2 * width**2)))
        return fit_model(g, x, y, [float(np.mean(y)), 0.0], ["baseline", "visibility"], weights, kind="dip")

    for k, name in ((0, "v0"), (1, "v_half_pi")):
        f = shape if k == 1 else fit_poisson(fixed_shape, x_ps, counts[:, 0])
        f.visibility = float(np.clip(f.params["visibility"], 0.0, 1.0))
        f.visibility_err = f.errors["visibility"]
        fits[name] = f
        a, b, _ = gates[k]
        summary[f"dip_visibility_{name}"] = (f.visibility, f.visibility_err, "1")
        summary[f"dip_width_{name}"] = (width, shape.errors["width"], "ps")
        summary[f"gate_coincidence_baseline_{name}"] = (a, 0.0, "1")
        summary[f"gate_interference_term_{name}"] = (b, 0.0, "1")
    rows = zip(x_ps, counts[:, 0], counts[:, 1], expected[:, 0], expected[:, 1])
    files = {
        "fast_hom.csv": _csv(["delay_ps", "c1_counts", "c2_counts", "expected_c1_counts", "expected_c2_counts"], rows)
    }
    data = {"delay": delays, "counts": counts, "expected": expected, "gates": gates}
    return RunResult(cfg.scenario, files, summary, data, fits)


# ---------------------------------------------------------------- PC scan


def solve_double_pair_prob(target: float, src, d1, d2, setup, field_name: str = "target_visibility",
                           p_range=None) -> float:
    """Double-pair probability giving surface visibility ``target``.

    The visibility is taken between coincidence probabilities ``p_range``,
    by default aligned versus orthogonal polarizations.
    """
    lo_p, hi_p = p_range if p_range is not None else (0.5 * (1 - src.max_overlap), 0.5)

    def vis(q):
        s = replace(src, double_pair_prob=q)
        r = expected_rates(np.array([lo_p, hi_p]), s, d1, d2, setup).coincidences
        return (r[1] - r[0]) / (r[1] + r[0])

    v_clean, v_dirty = vis(0.0), vis(src.pair_prob)
    if not v_dirty <= target <= v_clean:
        raise ConfigError(field_name, f"target {target} outside reachable range [{v_dirty:.4f}, {v_clean:.4f}]")
    return float(brentq(lambda q: vis(q) - target, 0.0, src.pair_prob, xtol=1e-18, rtol=1e-15))


def _resolved_source(cfg: ScenarioConfig, p_range=None):
    d1, d2 = cfg.detector(1), cfg.detector(2)
    setup = cfg.coincidence()
    if cfg.get("source.double_pair_prob") == "auto":
        base = cfg.source(double_pair_prob=0.0)
        q = solve_double_pair_prob(cfg.num("target_visibility"), base, d1, d2, setup,
                                   f"{cfg.scenario}.target_visibility", p_range)
        return replace(base, double_pair_prob=q), d1, d2, setup
    return cfg.source(), d1, d2, setup


_PAULI = (
    np.array([[1, 0], [0, -1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
)


def stokes_rotation(u) -> np.ndarray:
    """3x3 rotation of the Poincare sphere induced by a 2x2 unitary."""
    return np.array([[0.5 * np.trace(si @ u @ sj @ u.conj().T).real for sj in _PAULI] for si in _PAULI])


def fit_pc_surface(rotations, counts, passes: int = 3):
    """Fit ``counts = c0 + sum_ij K_ij R_ij(v)`` over a controller scan.

    For any fixed input polarizations the squared overlap after the
    controller is ``(1 + s2 . R(v) s1) / 2``, so the surface is linear in the
    nine rotation entries. Poisson weights come from the previous pass.
    Returns ``(fitted surface, coefficients, covariance, design matrix)``.
    """
    y = np.asarray(counts, dtype=float).ravel()
    X = np.column_stack([np.ones(y.size), rotations.reshape(y.size, 9)])
    w = np.ones_like(y)
    for _ in range(passes):
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
        fitted = X @ coef
        w = 1.0 / np.maximum(fitted, 1.0)
    cov = np.linalg.pinv((X * w[:, None]).T @ X)
    return fitted.reshape(np.shape(counts)), coef, cov, X


def _visibility_with_error(X, coef, cov, i_lo, i_hi):
    lo, hi = X[i_lo] @ coef, X[i_hi] @ coef
    vis = (hi - lo) / (hi + lo)
    grad = (2 * lo * X[i_hi] - 2 * hi * X[i_lo]) / (hi + lo) ** 2
    return float(lo), float(hi), float(vis), float(np.sqrt(max(grad @ cov @ grad, 0.0)))


def _pc_scan(cfg: ScenarioConfig) -> RunResult:
    v1 = cfg.sweep("v", "v1_start", "v1_stop")
    v2 = cfg.sweep("v", "v2_start", "v2_stop")
    # the probability surface depends on the source only through max_overlap
    shape = Plant(
        PolarizationState(cfg.num("photon1_alpha"), cfg.num("photon1_beta")),
        PolarizationState(cfg.num("photon2_alpha"), cfg.num("photon2_beta")),
        cfg.pc(), cfg.source(double_pair_prob=0.0), noise=cfg.noise,
    )
    p = np.array([[shape.coincidence_probability(a, b) for b in v2] for a in v1])
    src, d1, d2, setup = _resolved_source(cfg, (float(p.min()), float(p.max())))
    T = setup.integration_time
    plant = replace(shape, source=src, detector1=d1, detector2=d2, setup=setup)
    expected = expected_rates(p, src, d1, d2, setup).coincidences * T
    counts = _counts(expected.reshape(-1), cfg, "grid").reshape(expected.shape)

    lo, hi = float(np.min(counts)), float(np.max(counts))
    vis = (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0
    rot = np.array([[stokes_rotation(pc_unitary(plant.pc, a, b).matrix) for b in v2] for a in v1])
    fitted, coef, cov, X = fit_pc_surface(rot, counts)
    lo_fit, hi_fit, vis_fit, vis_fit_err = _visibility_with_error(
        X, coef, cov, int(np.argmin(fitted)), int(np.argmax(fitted)))
    imin = np.unravel_index(np.argmin(fitted), fitted.shape)

    # model-side reference values
    res = minimize(lambda v: plant.expected_counts(v[0], v[1], T), x0=[v1[imin[0]], v2[imin[1]]],
                   method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    rates0 = expected_rates(0.0, src, d1, d2, setup)
    floor = rates0.coincidences * T

    summary = {
        "surface_min": (lo, 0.0, "counts"),
        "surface_max": (hi, 0.0, "counts"),
        "surface_visibility": (vis, 0.0, "1"),
        "surface_min_fit": (lo_fit, 0.0, "counts"),
        "surface_max_fit": (hi_fit, 0.0, "counts"),
        "surface_visibility_fit": (vis_fit, vis_fit_err, "1"),
        "model_min_expected_counts": (float(res.fun), 0.0, "counts"),
        "model_accidental_floor": (floor, 0.0, "counts"),
        "double_pair_prob": (src.double_pair_prob, 0.0, "1"),
    }
    V1, V2 = np.meshgrid(v1, v2, indexing="ij")
    rows = zip(V1.ravel(), V2.ravel(), counts.ravel(), expected.ravel(), fitted.ravel())
    files = {"pc_scan.csv": _csv(["v1_V", "v2_V", "counts", "expected_counts", "fitted_counts"], rows)}
    data = {"v1": v1, "v2": v2, "counts": counts, "expected": expected, "plant": plant, "source": src}
    return RunResult(cfg.scenario, files, summary, data)


# ---------------------------------------------------------------- feedback


def _random_state(rng) -> PolarizationState:
    # uniform on the Poincare sphere
    return PolarizationState(0.5 * np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * pi))


def feedback_runs(cfg: ScenarioConfig, runs: int | None = None, drift: bool = False, max_iters: int | None = None,
                  noise: bool | None = None):
    """``(plant, trace, diverged)`` for each seeded loop run."""
    src, d1, d2, setup = _resolved_source(cfg)
    pc = cfg.pc()
    noise = cfg.noise if noise is None else noise
    every = cfg.integer("drift_every")
    events = cfg.integer("drift_events")
    if max_iters is None:
        max_iters = every * (events + 1) if drift else cfg.integer("max_iters")
    stop = cfg.num("stop_threshold")
    fcfg = FeedbackConfig(
        probe_delta=cfg.num("probe_delta"),
        learn_rate=cfg.num("learn_rate"),
        momentum=cfg.num("momentum"),
        max_iters=max_iters,
        integration_time=setup.integration_time,
        stop_threshold=None if (drift or stop <= 0) else stop,
    )
    box = cfg.num("start_box")
    n = runs if runs is not None else cfg.integer("drift_runs" if drift else "runs")
    tag = "drift" if drift else "runs"
    out = []
    for r in range(n):
        init = stream(cfg.seed, cfg.scenario, tag, "init", r)
        p1, p2 = _random_state(init), _random_state(init)
        start = init.uniform(-box, box, 2)
        schedule = {every * (k + 1): _random_state(init) for k in range(events)} if drift else {}
        plant = Plant(p1, p2, pc, src, d1, d2, setup, schedule, noise)
        rng = stream(cfg.seed, cfg.scenario, tag, "loop", r) if noise else None
        target = plant.floor_counts(setup.integration_time) / (plant.rate(0.5) * setup.integration_time)
        run_cfg = replace(fcfg, escape_threshold=target * (1 + cfg.num("escape_margin")))
        try:
            trace, diverged = run_loop(plant, run_cfg, start, rng), False
        except FeedbackDiverged as exc:
            trace, diverged = exc.trace, True
        out.append((plant, trace, diverged))
    return out


def _first_hit(values, threshold, start: int = 0):
    for i, v in enumerate(values[start:]):
        if v <= threshold:
            return i
    return None


def _feedback(cfg: ScenarioConfig) -> RunResult:
    margin = cfg.num("floor_margin")
    runs = feedback_runs(cfg)
    hits = []
    for _, trace, _ in runs:
        exp_norm = [r.expected_normalized for r in trace.centers()]
        hits.append(_first_hit(exp_norm, trace.floor * (1 + margin)))
    reached = [h for h in hits if h is not None]
    median = float(np.median(reached)) if len(reached) == len(hits) else float("inf")

    drift_runs = feedback_runs(cfg, drift=True)
    every = cfg.integer("drift_every")
    events = cfg.integer("drift_events")
    n_iter = every * (events + 1)
    mean_norm = np.zeros(n_iter)
    mean_exp = np.zeros(n_iter)
    reconverge = []
    for _, trace, _ in drift_runs:
        c = trace.centers()
        mean_norm[: len(c)] += [r.normalized for r in c]
        mean_exp[: len(c)] += [r.expected_normalized for r in c]
        exp_norm = [r.expected_normalized for r in c]
        for k in range(1, events + 1):
            h = _first_hit(exp_norm[: every * (k + 1)], trace.floor * (1 + margin), every * k)
            reconverge.append(np.inf if h is None else h)
    mean_norm /= len(drift_runs)
    mean_exp /= len(drift_runs)

    floor = runs[0][1].floor if runs else 0.0
    factor = median / REPORTED_FEEDBACK_ITERATIONS
    summary = {
        "median_updates_to_floor": (median, 0.0, "updates"),
        "runs_reaching_floor": (len(reached), 0, "runs"),
        "runs": (len(hits), 0, "runs"),
        "diverged_runs": (sum(d for _, _, d in runs), 0, "runs"),
        "normalized_floor": (floor, 0.0, "1"),
        "floor_margin": (margin, 0.0, "1"),
        "factor_vs_reported_iterations": (factor, 0.0, "1"),
        "within_factor_3_of_reported": (int(1 / 3 <= factor <= 3) if np.isfinite(factor) else 0, 0, "1"),
        "median_reconvergence_after_drift": (float(np.median(reconverge)) if reconverge else 0.0, 0.0, "updates"),
    }
    traces_buf = io.StringIO()
    write_trace_rows(traces_buf, [(i, t) for i, (_, t, _) in enumerate(runs)])
    drift_buf = io.StringIO()
    write_trace_rows(drift_buf, [(i, t) for i, (_, t, _) in enumerate(drift_runs)])
    files = {
        "feedback_traces.csv": traces_buf.getvalue(),
        "feedback_drift.csv": drift_buf.getvalue(),
        "feedback_drift_mean.csv": _csv(["iteration", "mean_normalized", "mean_expected_normalized"],
                                        zip(range(n_iter), mean_norm, mean_exp)),
    }
    data = {"runs": runs, "hits": hits, "drift_runs": drift_runs, "mean_normalized": mean_norm}
    return RunResult(cfg.scenario, files, summary, data)


_RUNNERS = {
    "switch_response": _switch_response,
    "fringes": _fringes,
    "fast_hom": _fast_hom,
    "pc_scan": _pc_scan,
    "feedback": _feedback,
}


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    """Simulate one scenario; writes ``<scenario>*.csv`` and a summary when ``cfg.out_dir`` is set."""
    result = _RUNNERS[cfg.scenario](cfg)
    result.files[f"{cfg.scenario}_summary.csv"] = _summary_csv(result.summary)
    if cfg.out_dir is not None:
        write_outputs(result, cfg.out_dir)
    return result


def write_outputs(result: RunResult, out_dir) -> list:
    """Write all files of ``result`` into ``out_dir`` via a staging directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        for name, text in result.files.items():
            (stage / name).write_text(text)
        paths = []
        for name in result.files:
            os.replace(stage / name, out / name)
            paths.append(out / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)
    return paths


