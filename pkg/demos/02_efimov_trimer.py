"""
The trimer at unitarity
=======================

At infinite scattering length three bosons have a geometric tower of
states. With a finite-range Gaussian only the two lowest are reachable; the
square root of their energy ratio is compared with the zero-range value.
Takes a few minutes with the default basis of 300.
"""

import argparse

from fewbody.scan import LITERATURE_SCALING, ZERO_RANGE_SCALING, scaling_factor
from fewbody.svm import SvmConfig

parser = argparse.ArgumentParser()
parser.add_argument("--basis", type=int, default=300)
args = parser.parse_args()

cfg = SvmConfig(basis_max=args.basis, threshold_mode=True, refinement_sweeps=1,
                convergence_tol=1e-7, patience=40, seed=0)
res = scaling_factor(cfg)
print(f"E3(0) = {res.e0:.6f} E_s   E3(1) = {res.e1:.3e} E_s   basis {res.basis_size}")
print(f"sqrt(E0/E1) = {res.value:.3f}   zero range {ZERO_RANGE_SCALING:.2f}"
      f"   finite-range literature {LITERATURE_SCALING}")
