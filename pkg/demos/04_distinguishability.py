"""
Coarse-grained read-outs
========================

Sharp collective-x counting separates the branches perfectly.  Merging
neighbouring outcomes, blurring them with a Gaussian POVM or dephasing
the qubits first all bring the success probability down to about 82%.
"""

import math

import numpy as np

from clonemacro import distinguish

ns = np.arange(3, 200, 2)
u = 0.9

series = {
    "pair": [distinguish.distinguishability(distinguish.pair_coarsened_probabilities(n)) for n in ns],
    "povm": [distinguish.distinguishability(distinguish.povm_probabilities(n, math.sqrt(n))) for n in ns],
    "noise": [distinguish.distinguishability(distinguish.noisy_probabilities(n, u)) for n in ns],
}

for name, values in series.items():
    print(f"{name:6s} D(3) = {values[0]:.4f}  D(99) = {values[48]:.4f}  D(199) = {values[-1]:.4f}")

# Fit D_inf + a/N + b/N^2 to read off the limit
print()
for name, values in series.items():
    limit, diag = distinguish.extrapolate_limit(ns, values)
    print(f"{name:6s} D_inf = {limit:.4f}  (max residual {diag.max_residual:.1e}, cond {diag.condition_number:.1e})")

# Outcome profile of the POVM for N = 31
n = 31
for sigma in (0.0, 1.0, math.sqrt(n)):
    dist = distinguish.povm_probabilities(n, sigma)
    print(f"sigma = {sigma:5.2f}: p+ = {np.round(dist.probs_plus[:6], 3)} ...  Delta = {dist.delta:.3f}")
