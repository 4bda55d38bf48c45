"""Routing a heralded photon with a 20 ns switching pulse.

The interferometer idles in the bar state. A pulse drives it to the cross
state, and the heralded photon is counted at both outputs as the pulse is
delayed across the photon arrival time.
"""

# %%
from eophot import ScenarioConfig, run_scenario

res = run_scenario(ScenarioConfig("switch_response", seed=3))
d = res.data
print("delay (ns)    bar  cross")
for i in range(0, len(d["delay"]), max(1, len(d["delay"]) // 16)):
    print(f"{d['delay'][i] * 1e9:9.1f} {d['bar'][i]:6.0f} {d['cross'][i]:6.0f}")

# %%
for name in ("switching_efficiency", "rise_time_fit", "count_transition_10_90"):
    value, unc, unit = res.summary[name]
    print(f"{name:24s} {value:.4f} +- {unc:.4f} {unit}")

# %%
# Lower coupler quality limits the efficiency through the extinction of the cross state.
for ext in (1.0, 0.979, 0.95):
    r = run_scenario(ScenarioConfig("switch_response", noise=False).with_values(mzi__extinction_visibility=ext))
    print(f"extinction {ext:.3f} -> efficiency {r.value('switching_efficiency'):.4f}")
