"""Vector Lyapunov verdicts for two areas joined by a tie line.

The test is sufficient only, so "indeterminate" is not a claim of
instability: for the tie sweep the eigenvalue oracle shows every point is
Hurwitz. For a synthetic pair of scalar subsystems the verdict flips from
stable to indeterminate at coupling 1, which is where the pair really does
lose stability.
"""
import numpy as np

from gridflux.sim import TwoAreaParams, stability_sweep
from gridflux.stability import SubsystemSpec, assess

print("two-area tie sweep")
for b, rep in stability_sweep(TwoAreaParams()):
    print(f"  b_tie={b:6.2f}  verdict={rep.verdict:<14} max Re(eig)={rep.oracle_max_real:+.4f}")

print("synthetic pair, A_i = -1")
subs = [SubsystemSpec(np.array([[-1.0]])), SubsystemSpec(np.array([[-1.0]]))]
for k in (0.2, 0.5, 0.9, 1.1, 2.0):
    c = np.array([[k]])
    rep = assess(subs, {(0, 1): c, (1, 0): c}, oracle=True)
    print(f"  coupling={k:4.1f}  verdict={rep.verdict:<14} max Re(eig)={rep.oracle_max_real:+.3f}")
