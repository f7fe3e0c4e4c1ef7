"""
Making one particle lighter
===========================

Three identical bosons plus one particle of mass M, all pairs sharing one
Gaussian tuned to heavy-light unitarity. Lighter M needs a deeper well, so
everything binds more strongly and the heavy particles pull together.
Several minutes per mass ratio at the default basis.
"""

import argparse

from fewbody.scan import mass_scan
from fewbody.svm import SvmConfig

parser = argparse.ArgumentParser()
parser.add_argument("--basis", type=int, default=100)
parser.add_argument("--ratios", type=float, nargs="+", default=[1.0, 0.5, 0.2, 0.1])
args = parser.parse_args()

cfg = SvmConfig(basis_max=args.basis, seed=2, refinement_sweeps=1, patience=30)
print(" M/m    V0/E_s      E0/E_s     E1/E_s   E0/E1   <r_HH^2>   G_crit")
for rec in mass_scan(4, args.ratios, cfg):
    if rec.error:
        print(f"{rec.mass_ratio:4.2f}  failed: {rec.error}")
        continue
    hh = rec.pair_msd[0].get("HH", float("nan"))
    print(f"{rec.mass_ratio:4.2f}  {rec.v0:8.3f}  {rec.energies[0]:10.4f} {rec.energies[1]:10.4f}"
          f"  {rec.energy_ratio:6.2f}  {hh:8.3f}  {rec.g_crit:7.3f}")
