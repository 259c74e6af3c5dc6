"""Two areas after a load step, with and without secondary control.

Droop alone leaves a steady frequency offset of -dP/(beta_1 + beta_2).
AGC integrates the area control error and pulls both frequency and the
scheduled tie flow back.
"""
from dataclasses import replace

from gridflux.sim import default_scenario, run

base = default_scenario("two_area_freq")
for agc in (False, True):
    tp = replace(base.two_area, agc=agc, solar_sigma=0.0)
    _, s = run(replace(base, two_area=tp))
    f = ", ".join(f"{x:+.2e}" for x in s.extra["final_freq_dev"])
    print(f"agc={agc!s:<5}  final freq dev [pu]: {f}   tie dev: {s.extra['final_tie_dev']:+.2e}")
print(f"droop-only prediction: {-base.two_area.step_size / sum(s.extra['beta']):+.2e}")
