"""
Cloned states in the Dicke basis
================================

Build the two outputs of the phase-covariant cloner, look at them in the
x basis and check the reduced state of a few qubits against brute force.
"""

import numpy as np

from clonemacro import oracle
from clonemacro.symcore import (
    Axis,
    cloner_state,
    dicke_basis_change,
    expectation_and_variance,
    reduced_state,
)

np.set_printoptions(precision=4, suppress=True)

# The two branches (|N,a> +- |N,b>)/sqrt2 with a, b = (N -+ 1)/2
n = 7
plus, minus = cloner_state(n, +1), cloner_state(n, -1)
print("z-basis amplitudes of psi+:", plus.amplitudes.real)

# In the x basis psi+ lives on even and psi- on odd excitation numbers
print("x-basis amplitudes of psi+:", plus.in_axis(Axis.X).amplitudes.real)
print("x-basis amplitudes of psi-:", minus.in_axis(Axis.X).amplitudes.real)

# The basis change is real, symmetric and its own inverse
b = dicke_basis_change(n)
print("B B = 1:", np.allclose(b @ b, np.eye(n + 1)))

# Collective spin along x: mean +-(N+1)/2
for label, state in (("psi+", plus), ("psi-", minus)):
    mean, var = expectation_and_variance(state, Axis.X)
    print(f"{label}: <sum sigma_x> = {mean:+.3f}, variance = {var:.3f}")

# Two-qubit reduced state, symmetric-subspace formula vs full partial trace
k = 2
rho = reduced_state(n, +1, k).matrix
full = oracle.partial_trace(oracle.embed_symmetric(plus), range(k)).matrix
iso = oracle.symmetric_isometry(k)
print("reduced state (k=2):")
print(rho.real)
print("max deviation from brute force:", np.abs(iso.conj().T @ full @ iso - rho).max())
