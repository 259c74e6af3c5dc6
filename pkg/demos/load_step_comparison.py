"""Four controllers on the same RLC line feeding a constant-power load.

At t = 1 s the load jumps. The cascaded PI loop and the single-time-scale
energy law lose the bus voltage; the PD law and the two-time-scale energy
law ride through. Run from the repository root:

    python3 demos/load_step_comparison.py
"""
from dataclasses import replace

from gridflux.control import ControllerConfig
from gridflux.sim import default_scenario, run

base = default_scenario("rlc_cpl_step")
print(f"{'controller':<16}{'collapsed':>10}{'at [s]':>9}{'settled':>9}{'min v1':>9}")
for kind in ("pi_two_loop", "pd", "energy_single", "energy_two_ts"):
    traj, s = run(replace(base, tf=4.0, controller=ControllerConfig(kind)))
    at = f"{s.collapse_time:.3f}" if s.collapsed else "-"
    print(f"{kind:<16}{str(s.collapsed):>10}{at:>9}{str(s.settled):>9}{traj['v1'].min():>9.3f}")
