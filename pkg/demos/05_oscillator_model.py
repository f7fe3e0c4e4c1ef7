"""
A schematic oscillator model
============================

Springs replace the pair forces and a constant shift V_N sets the binding.
At the N-body threshold strength the (N+1)-body ground state is bound by
about 1/(2N) of the oscillator scale while the first excited state sits
about 1/(6N) above zero.
"""

from fewbody import schematic

print("     N   bracket0*N   bracket1*N   (one extra quantum)")
for n in (3, 10, 100, 1000, 10**4):
    b0, b1 = schematic.threshold_brackets(n, schematic.SINGLE_QUANTUM)
    print(f"{n:6d}   {b0 * n:10.5f}   {b1 * n:10.5f}")

# The form with every particle excited leaves a finite gap instead.
b0, b1 = schematic.threshold_brackets(10**4, schematic.PRINTED)
print(f"all particles excited, N=1e4: excited bracket {b1:.4f} (-> 2/3)")

model = schematic.OscillatorModel(omega=1.0, V_N=schematic.oscillator_threshold_strength(4, 1.0), N=4)
print(f"N=4 at its own threshold: E0 = {model.energy(0):.2e}, <r^2>0 = {model.msr(0):.3f}")
