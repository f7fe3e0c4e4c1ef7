"""
An extra particle around an N-body core
=======================================

Folding the pair Gaussian over a Gaussian core density gives one Gaussian
between the core and an extra particle, with strength G_crit. Values near
1.34 mean the core-particle scattering length diverges. The radius relation
between core and core-plus-one converts sizes into a halo binding energy.
"""

from fewbody import schematic
from fewbody.observables import halo_decompose

# Tabulated threshold data: N, reduced V0 at threshold, <r^2>_N, <r^2>^(1)_{N+1}
table = [(3, -1.066, 43.6, 47.1), (4, -0.853, 8.0, 19.7), (5, -0.704, 5.6, 12.2),
         (6, -0.607, 3.7, 4.9)]

print(f"critical constant {schematic.critical_constant():.5f}")
print(" N   G_crit   r2_halo   B_halo     a_halo/b")
for n, v, r0, r1 in table:
    row = schematic.halo_row(n, v, r0, r1)
    print(f"{n:2d}  {row.g_crit:7.3f}  {row.r2_halo:8.1f}  {row.b_halo:9.2e}  {row.a_halo:9.2f}")

# A halo chain by hand: core radius, total radius, and the implied binding.
est = halo_decompose(43.6, 47.1, 3)
print(f"trimer core + 1: <r^2>_halo = {est.r2_halo:.1f} b^2, B_halo = {est.b_halo:.2e} E_s")

# At unitarity of the heavy-light pair the strength depends only on masses and core size.
for ratio in (1.0, 0.5, 0.2, 0.1):
    g = schematic.g_crit_unitarity(4, ratio, 8.0)
    print(f"M/m = {ratio:4.2f}: G_crit(N+1=4, R^2=8) = {g:.3f}")
