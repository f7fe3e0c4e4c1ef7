"""
Binding thresholds and the size power law
=========================================

Each N-body threshold is found by weakening the interaction from a bound
depth until the state meets its breakup channel. Runs are chained: N starts
at the ground threshold of N-1, where its own states are already bound.
Radii at threshold shrink as a power of N-1.

Runtime grows quickly with N; --max-n 5 takes several minutes on one core.
"""

import argparse

from fewbody.scan import ChannelEnergy, find_threshold, fit_power_law
from fewbody.svm import SvmConfig

parser = argparse.ArgumentParser()
parser.add_argument("--max-n", type=int, default=5)
parser.add_argument("--basis", type=int, default=120)
args = parser.parse_args()

rows = {}
v_start = None  # unitarity for the trimer
for n in range(3, args.max_n + 1):
    for state in (0, 1):
        if n == 3 and state == 1:
            continue  # the excited trimer binds only extremely close to unitarity
        cfg = SvmConfig(basis_max=args.basis, patience=30, seed=1, refinement_sweeps=1,
                        threshold_mode=True, convergence_tol=1e-7,
                        d_max_threshold=200.0 if state == 0 else 1000.0)
        ch = ChannelEnergy(n, cfg, known_threshold=v_start)
        res = find_threshold(n, state, cfg, v_bound=v_start, channel=ch)
        rows[n, state] = res
        print(f"N={n} state {state}: V0/E_s={res.v0:.4f} (reduced {res.v0_reduced:.4f})"
              f"  a/b={res.a_over_b:.3f}  <r^2>={res.msr:.2f}  r_d={res.r_d:.3f}")
    v_start = rows[n, 0].v0

for state in (0, 1):
    radii = {n: r.msr for (n, s), r in rows.items() if s == state and n >= 4}
    if len(radii) >= 3:
        fit = fit_power_law(radii)
        print(f"state {state}: <r^2>_th = {fit.C:.1f} (N-1)^{fit.p:.2f}  R^2={fit.r_squared:.3f}")
    else:
        print(f"state {state}: need N up to 6 for a three-point fit")
