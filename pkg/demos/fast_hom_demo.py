"""HOM dips while the interferometer state is switched at 4 MHz.

A square wave toggles the interferometer between the crossing point, where
the two photons never meet, and the balanced point, where they interfere.
Gating the coincidences by drive phase gives one dip per level. Ringing of
the drive after each edge smears the balanced level and costs visibility.
"""

# %%
from scipy.optimize import brentq

from eophot import ScenarioConfig, run_scenario


def visibility(amplitude, noise=False, seed=0):
    cfg = ScenarioConfig("fast_hom", seed=seed, noise=noise).with_values(drive__ringing_amplitude=amplitude)
    return run_scenario(cfg)


# %%
res = visibility(0.0, noise=True, seed=5)
for name in ("dip_visibility_v0", "dip_visibility_v_half_pi", "dip_width_v_half_pi"):
    value, unc, unit = res.summary[name]
    print(f"{name:26s} {value:.4f} +- {unc:.4f} {unit}")

# %%
print("ringing (V)  V at the balanced level")
for a in (0.0, 0.5, 1.0, 2.0):
    print(f"{a:10.2f}  {visibility(a).value('dip_visibility_v_half_pi'):.4f}")

# %%
# How much ringing brings the balanced-level dip down to 82 %?
amp = brentq(lambda a: visibility(a).value("dip_visibility_v_half_pi") - 0.82, 0.0, 3.0, xtol=1e-3)
print(f"ringing amplitude for 82 % visibility: {amp:.3f} V")
