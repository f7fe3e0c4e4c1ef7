"""
Two-body reference physics and the unit convention
===================================================

The radial solver is the yardstick for everything else. This script finds
the depth at which a Gaussian well first binds, shows how tabulated depths
relate to it, and checks the variational solver against the radial one.
"""

from fewbody import radial
from fewbody.svm import SvmConfig, solve_states
from fewbody.system import PairPotential, SystemSpec, reduced_strength

# %% The first zero-energy bound state of V0 exp(-r^2/b^2), with hbar = m = b = 1.
# Energies are then in E_s = hbar^2 / (2 mu b^2) = 1.
v_crit = radial.critical_strength(1, mu=0.5)
print(f"critical depth          V0 / E_s        = {v_crit:.7f}")
print(f"as reduced strength     mu V0 b^2/hbar^2 = {reduced_strength(v_crit):.7f}")
print("tabulated dimer threshold                 = -1.353(9)")

# %% Scattering length on both sides of the critical depth.
for v in (-2.0, -2.6, 0.999 * v_crit, 1.001 * v_crit, -3.5):
    res = radial.scattering_length(PairPotential(v), 0.5)
    print(f"V0 = {v:8.4f}   a/b = {res.scattering_length:12.4f}   nodes = {res.node_count}")

# %% The variational dimer must land on the radial energy from above.
for a in (3.0, 5.0, 20.0):
    v = radial.strength_for_scattering_length(a, 1, 0.5)
    exact = radial.bound_energies(PairPotential(v), 0.5)[0]
    e, _ = solve_states(SystemSpec.identical(2, v), SvmConfig(basis_max=30, seed=1))
    print(f"a/b = {a:5.1f}  radial {exact:.10f}  SVM {e[0]:.10f}  rel {abs(e[0] / exact - 1):.1e}")
