"""
Effective size of the micro-macro state
=======================================

The five effective-size measures, with the covariance-method variances in
exact rational arithmetic.
"""

from clonemacro import macromeasures
from clonemacro.symcore import micro_macro_state

# Covariance matrix of (sigma_x,y,z on the micro qubit, M_x,y,z on the clones)
cov = macromeasures.covariance_matrix(micro_macro_state(3), exact=True)
print("labels:", cov.labels)
print(cov.entries)

# Optimal local observable and its variance
opt = macromeasures.max_local_variance(micro_macro_state(3), exact=True)
print("max variance:", opt.variance, "via", opt.certificate)
print("coefficients:", list(opt.coefficients))

# Table of all measures
print()
print(f"{'N':>4} {'Korsb.':>7} {'Marq.':>6} {'rel. Fisher':>12} {'index p':>9} {'V_psi':>7} {'V_phi0':>7}")
for n in (3, 5, 9, 21, 51, 101):
    r = macromeasures.effective_sizes(n, exact=True)
    print(
        f"{n:4d} {r.korsbakken:7.0f} {r.marquardt:6.0f} {str(r.relative_fisher):>12} "
        f"{float(r.index_p_size):9.3f} {str(r.max_variance):>7} {str(r.max_variance_branch):>7}"
    )

# Two-operation certificate: sigma_z (x) M_z swaps the branches, single sites cannot
cert = macromeasures.marquardt_certificate(9)
print()
print("two-body overlap:", cert.two_body_overlap, " single-site bounds:", cert.single_particle_overlaps)
