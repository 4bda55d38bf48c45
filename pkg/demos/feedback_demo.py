"""Gradient feedback on a two-voltage polarization controller.

Two photons meet at a splitter; the coincidence rate is lowest when their
polarizations match. The loop probes the rate around the current voltages,
steps downhill, and keeps tracking when the input polarization drifts.
"""

# %%
import numpy as np

from eophot import ScenarioConfig
from eophot.scenarios import feedback_runs

cfg = ScenarioConfig("feedback", seed=2)
runs = feedback_runs(cfg, runs=5)
for plant, trace, diverged in runs:
    c = trace.centers()
    print(f"start {c[0].expected_normalized:.3f} -> end {c[-1].expected_normalized:.3f}"
          f"  (floor {trace.floor:.3f}, overlap {plant.polarization_overlap(c[-1].v1, c[-1].v2):.4f})")

# %%
# Tracking: photon 2 changes polarization every few iterations.
drift = feedback_runs(cfg, drift=True, runs=20)
mean = np.mean([[r.expected_normalized for r in t.centers()] for _, t, _ in drift], axis=0)
every = cfg.integer("drift_every")
for i in range(0, len(mean), max(1, every // 2)):
    mark = "  <- drift" if i and i % every == 0 else ""
    print(f"iteration {i:3d}  mean objective {mean[i]:.3f}{mark}")
