"""
Telling the branches apart from a subgroup
==========================================

Optimal success probability for distinguishing psi+ from psi- when only k
of the cloned qubits are accessible.
"""

import math

import numpy as np

from clonemacro import macromeasures

# Large-N limit: k measured qubits, and all but m qubits
for k in (1, 2, 5, 20, 100, 200):
    p = macromeasures.asymptotic_subgroup_probability(k)
    print(f"k = {k:4d}   P = {p:.5f}")
print()
for m in (1, 2, 5, 20, 100):
    p = macromeasures.asymptotic_complement_probability(m)
    print(f"all but {m:3d}   P = {p:.5f}")
print("1/2 (1 + 1/sqrt2) =", 0.5 * (1 + 1 / math.sqrt(2)))

# The curve at finite N is monotone and reaches 1 only for the whole register
n = 41
curve = macromeasures.subgroup_curve(n)
print()
print(f"N = {n}: P(1) = {curve[0]:.4f}, P(N/2) = {curve[n // 2]:.4f}, P(N-1) = {curve[-2]:.4f}, P(N) = {curve[-1]:.4f}")
print("monotone:", bool(np.all(np.diff(curve) >= -1e-12)))

# No small group reaches 99%, so the register counts as one group
print("Korsbakken effective size:", macromeasures.korsbakken_effective_size(n))
