"""
Closed forms against brute force
================================

Every analytic probability is recomputed in the full 2^N-dimensional space.
A deliberately wrong formula is included and must be caught.
"""

from clonemacro import crosscheck

results = crosscheck.run_checks((3, 5, 7), n_points=20, seed=0)
for r in results:
    kind = "detect" if r.canary else "agree "
    status = "ok" if r.passed else "FAIL"
    print(f"{r.name:18s} N={r.n_qubits}  {kind}  dev = {r.max_deviation:.2e}  tol = {r.tolerance:.0e}  {status}")

print("all passed:", all(r.passed for r in results))
