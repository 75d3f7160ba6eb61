"""Effective-size measures for the cloned micro-macro state.

Covers subgroup discrimination (how well ``|psi^+>`` and ``|psi^->`` can be
told apart from ``k`` of their qubits), the two-operation certificate for the
micro-macro branches, and the covariance-matrix search for the local
observable of maximal variance, which feeds the relative Fisher and
index-p / Fisher effective sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .errors import ConsistencyError
from .symcore import (
    Axis,
    MicroMacroState,
    SymmetricPureState,
    _check_odd,
    _log_binom_array,
    cloner_state,
    collective_matrix,
    micro_macro_state,
    reduced_operator,
    split_coefficients,
)

__all__ = [
    "SubgroupResult",
    "CovarianceMatrix",
    "LocalVarianceOptimum",
    "MarquardtCertificate",
    "EffectiveSizeReport",
    "asymptotic_subgroup_probability",
    "asymptotic_complement_probability",
    "subgroup_success_probability",
    "subgroup_curve",
    "korsbakken_effective_size",
    "marquardt_certificate",
    "marquardt_check",
    "covariance_matrix",
    "max_local_variance",
    "variance_of_local_operator",
    "effective_sizes",
]

ASYMPTOTIC_FRACTION = 0.1
EXACT_FALLBACK_LIMIT = 2000


def _tridiagonal_trace_norm(off: np.ndarray) -> float:
    """Trace norm of a real symmetric tridiagonal matrix with zero diagonal."""
    off = np.asarray(off, dtype=float)
    if off.size == 0:
        return 0.0
    # eigenvalues only; the default driver allocates an n x n workspace
    ev = scipy.linalg.eigvalsh_tridiagonal(np.zeros(off.size + 1), off, lapack_driver="sterf")
    return float(np.abs(ev).sum())


# -- subgroup discrimination -------------------------------------------------


@dataclass(frozen=True)
class SubgroupResult:
    probability: float
    mode: str
    reliable: bool = True


def asymptotic_subgroup_probability(k: int) -> float:
    """Large-``n`` success probability when ``k`` cloned qubits are measured."""
    if k < 1:
        raise ValueError("k must be at least 1")
    j = np.arange(k + 1)
    logc = _log_binom_array(k, j) - k * math.log(2)
    off = np.exp(0.5 * (logc[:-1] + logc[1:]))
    return 0.5 + 0.25 * _tridiagonal_trace_norm(off)


def asymptotic_complement_probability(m: int) -> float:
    """Large-``n`` success probability when all but ``m`` cloned qubits are measured."""
    if m < 0:
        raise ValueError("m must be non-negative")
    j = np.arange(m + 1)
    off = np.exp(_log_binom_array(m, j) - m * math.log(2))
    return 0.5 + 0.25 * _tridiagonal_trace_norm(off)


def _exact_subgroup_probability(n: int, k: int) -> float:
    a, b = (n - 1) // 2, (n + 1) // 2
    ca = split_coefficients(n, k, a)
    cb = split_coefficients(n, k, b)
    return 0.5 + 0.25 * _tridiagonal_trace_norm(np.sqrt(ca[:-1] * cb[1:]))


def subgroup_success_probability(n_qubits: int, k: int, mode: str = "exact") -> SubgroupResult:
    """Optimal probability of telling ``|psi^+>`` from ``|psi^->`` using ``k`` qubits.

    ``P = 1/2 + ||rho_k^+ - rho_k^-||_1 / 4``.  The difference of the reduced
    states is tridiagonal with zero diagonal, so its trace norm comes from a
    tridiagonal eigensolve.

    In ``"asymptotic"`` mode the large-``n`` limit is used: the ``k``-qubit
    form when ``k <= n/2`` and the all-but-``n-k`` form otherwise.  When
    neither ``k`` nor ``n - k`` is small compared with ``n`` the exact value is
    returned instead for ``n <= 2000``; above that the asymptotic value comes
    back with ``reliable=False``.
    """
    n = _check_odd(n_qubits)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if mode == "exact":
        return SubgroupResult(_exact_subgroup_probability(n, k), "exact")
    if mode != "asymptotic":
        raise ValueError(f"unknown mode {mode!r}")
    valid = k <= ASYMPTOTIC_FRACTION * n or n - k <= ASYMPTOTIC_FRACTION * n
    if not valid and n <= EXACT_FALLBACK_LIMIT:
        return SubgroupResult(_exact_subgroup_probability(n, k), "exact")
    p = asymptotic_subgroup_probability(k) if k <= n / 2 else asymptotic_complement_probability(n - k)
    return SubgroupResult(p, "asymptotic", reliable=valid)


def subgroup_curve(n_qubits: int, ks=None, mode: str = "exact") -> np.ndarray:
    """``P(k)`` for each ``k`` in ``ks`` (default ``1..n``)."""
    ks = range(1, n_qubits + 1) if ks is None else ks
    return np.array([subgroup_success_probability(n_qubits, int(k), mode).probability for k in ks])


def korsbakken_effective_size(n_qubits: int, threshold: float = 0.99) -> float:
    """Number of groups each of which alone reveals the branch with probability ``threshold``.

    The micro qubit is one such group.  If some ``k* <= n/2`` macro qubits
    reach the threshold, the macro register splits into ``floor(n/k*)``
    groups; otherwise the whole register counts as a single group.
    """
    n = _check_odd(n_qubits)
    if not 0.5 < threshold < 1:
        raise ValueError("threshold must lie in (1/2, 1)")
    for k in range(1, n // 2 + 1):
        if _exact_subgroup_probability(n, k) >= threshold:
            return float(n // k + 1)
    return 2.0


# -- two-operation certificate ----------------------------------------------


@dataclass(frozen=True)
class MarquardtCertificate:
    n_qubits: int
    two_body_overlap: float
    mapping_residual: float
    single_particle_overlaps: tuple[float, float]
    effective_size: int


def marquardt_certificate(n_qubits: int, eps: float = 1e-6) -> MarquardtCertificate:
    """Check that ``sigma_z (x) M_z`` maps one branch onto the other and no one-body operator can.

    For an operator ``O`` on one qubit with ``||O|| <= 1`` the largest
    achievable ``|<phi_1|O|phi_0>|`` is the trace norm of the reduced
    transition operator ``Tr_rest |phi_0><phi_1|``; this is evaluated for the
    micro qubit and for one (any) macro qubit.
    """
    n = _check_odd(n_qubits)
    state = micro_macro_state(n)
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    minus = np.array([1.0, -1.0]) / math.sqrt(2)
    phi0 = np.kron(plus, state.macro_plus.amplitudes)
    phi1 = np.kron(minus, state.macro_minus.amplitudes)
    op = np.kron(np.diag([1.0, -1.0]), collective_matrix(n, Axis.Z))
    mapped = op @ phi0
    two_body = abs(np.vdot(phi1, mapped)) / np.linalg.norm(mapped)
    residual = float(np.linalg.norm(mapped - phi1))

    macro_overlap = state.macro_minus.overlap(state.macro_plus)
    # ||(|+><-|)||_1 = 1, so the micro-site bound is |<macro_minus|macro_plus>|.
    micro_site = abs(macro_overlap)
    macro_transition = reduced_operator(state.macro_plus, state.macro_minus, 1)
    macro_site = abs(np.vdot(minus, plus)) * float(
        np.linalg.svd(macro_transition, compute_uv=False).sum()
    )
    if abs(two_body - 1) > eps or residual > eps:
        raise ConsistencyError(
            f"sigma_z (x) M_z does not map the branches onto each other (overlap {two_body})"
        )
    if max(micro_site, macro_site) > 1 - eps:
        raise ConsistencyError("a single-particle operator already connects the branches")
    return MarquardtCertificate(n, float(two_body), residual, (float(micro_site), float(macro_site)), 2)


def marquardt_check(n_qubits: int) -> int:
    return marquardt_certificate(n_qubits).effective_size


# -- covariance method -------------------------------------------------------

_OPS = ("x", "y", "z")


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Covariance ``Re <dA dB>`` of collective Pauli sums.

    ``groups`` lists the index triples belonging to one qubit group and
    ``weights`` the number of qubits in each group.  ``entries`` is a numpy
    array or, for exact evaluation, a sympy ``Matrix``.
    """

    labels: tuple[str, ...]
    entries: object
    groups: tuple[tuple[int, ...], ...]
    weights: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def exact(self) -> bool:
        return not isinstance(self.entries, np.ndarray)


class _Arith:
    """Scalar operations for the float and sympy back ends."""

    def __init__(self, exact: bool):
        self.exact = exact
        if exact:
            import sympy

            self.sqrt = sympy.sqrt
            self.I = sympy.I
            self.conj = sympy.conjugate
            self.re = lambda v: sympy.nsimplify(sympy.re(sympy.expand(v)))
            self.zero = sympy.Integer(0)
            self.simplify = sympy.expand
        else:
            self.sqrt = math.sqrt
            self.I = 1j
            self.conj = lambda v: complex(v).conjugate()
            self.re = lambda v: complex(v).real
            self.zero = 0.0
            self.simplify = lambda v: v


def _apply_pauli_sum(vec: dict, axis: str, n: int, slot: int, ar: _Arith) -> dict:
    """Apply ``sum sigma_axis`` on the macro register (``n`` qubits) or the micro qubit (``n=1``).

    ``vec`` maps index tuples to amplitudes; ``slot`` selects the tuple entry
    holding the excitation number of the register acted on.
    """
    out: dict = {}

    def add(key, val):
        out[key] = out.get(key, ar.zero) + val

    for key, amp in vec.items():
        k = key[slot]
        if axis == "z":
            add(key, (n - 2 * k) * amp)
            continue
        if k < n:
            up = ar.sqrt((k + 1) * (n - k))
            coef = up if axis == "x" else ar.I * up
            add(key[:slot] + (k + 1,) + key[slot + 1 :], coef * amp)
        if k > 0:
            down = ar.sqrt(k * (n - k + 1))
            coef = down if axis == "x" else -ar.I * down
            add(key[:slot] + (k - 1,) + key[slot + 1 :], coef * amp)
    return out


def _inner(u: dict, v: dict, ar: _Arith):
    total = ar.zero
    for key, val in v.items():
        if key in u:
            total += ar.conj(u[key]) * val
    return ar.simplify(total)


def _state_dict(state, exact: bool):
    """Sparse amplitudes keyed by ``(micro bit, k)`` or ``(k,)`` in the z basis."""
    if isinstance(state, MicroMacroState):
        n = state.n_macro
        if exact:
            values = state.exact_vector()
            if values is None:
                raise ValueError("state carries no exact amplitudes")
        else:
            values = list(state.vector())
        keys = [(m, k) for m in (0, 1) for k in range(n + 1)]
        return n, {key: v for key, v in zip(keys, values) if v != 0}
    state = state.in_axis(Axis.Z)
    n = state.n_qubits
    if exact:
        if state.exact is None:
            raise ValueError("state carries no exact amplitudes")
        values = state.exact
    else:
        values = list(state.amplitudes)
    return n, {(k,): v for k, v in enumerate(values) if v != 0}


def covariance_matrix(state, exact: bool = False) -> CovarianceMatrix:
    """Covariance matrix of the symmetric local-operator ansatz.

    For a :class:`MicroMacroState` the six operators are ``sigma_{x,y,z}`` on
    the micro qubit followed by ``M_{x,y,z}`` on the cloned register; for a
    :class:`SymmetricPureState` only the three collective ones.  With
    ``exact=True`` entries are sympy numbers computed from the exact
    amplitudes attached by the state constructors.
    """
    ar = _Arith(exact)
    n, vec = _state_dict(state, exact)
    if isinstance(state, MicroMacroState):
        specs = [(a, 1, 0) for a in _OPS] + [(a, n, 1) for a in _OPS]
        labels = tuple(f"micro_{a}" for a in _OPS) + tuple(f"macro_{a}" for a in _OPS)
        groups, weights = ((0, 1, 2), (3, 4, 5)), (1, n)
    else:
        specs = [(a, n, 0) for a in _OPS]
        labels = tuple(f"macro_{a}" for a in _OPS)
        groups, weights = ((0, 1, 2),), (n,)
    applied = [_apply_pauli_sum(vec, a, size, slot, ar) for a, size, slot in specs]
    means = [_inner(vec, av, ar) for av in applied]
    dim = len(specs)
    rows = [[None] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(i, dim):
            val = ar.re(_inner(applied[i], applied[j], ar) - means[i] * means[j])
            rows[i][j] = rows[j][i] = val
    if exact:
        import sympy

        entries = sympy.Matrix(rows)
    else:
        entries = np.array(rows, dtype=float)
    return CovarianceMatrix(labels, entries, groups, weights)


@dataclass(frozen=True, eq=False)
class LocalVarianceOptimum:
    """Maximal variance of a local observable with unit-norm coefficients on every qubit.

    ``coefficients`` holds one Pauli-direction vector per qubit group, laid out
    like the covariance matrix.  ``certificate`` says how optimality was
    established: ``"separable"`` (no correlations between groups, so the
    group maxima add), ``"aggregate"`` (the optimum of the relaxed problem with
    only the total norm fixed is feasible) or ``"local-search"``.
    """

    variance: object
    coefficients: object
    certificate: str
    covariance: CovarianceMatrix


def variance_of_local_operator(cov: CovarianceMatrix, coefficients) -> float:
    c = np.asarray(coefficients, dtype=float)
    return float(c @ np.asarray(cov.entries, dtype=float) @ c)


def _tr_sphere_max(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Maximiser of ``u.A.u + 2 b.u`` over the unit sphere."""
    lam, q = np.linalg.eigh(a)
    g = q.T @ b
    top = lam[-1]
    if np.linalg.norm(g) < 1e-15:
        return q[:, -1]
    gap = top - lam
    near = gap < 1e-12 * max(1.0, abs(top))
    if np.all(np.abs(g[near]) < 1e-13):
        # Possible hard case: check whether the secular root sits at top.
        inner = np.where(near, 0.0, g / np.where(near, 1.0, gap))
        if inner @ inner <= 1:
            u = inner.copy()
            u[np.flatnonzero(near)[0]] = math.sqrt(1 - inner @ inner)
            return q @ u

    def secular(mu):
        return float(np.sum(g**2 / (mu - lam) ** 2) - 1)

    hi = top + np.linalg.norm(g) + 1e-12
    lo = top + 1e-14 * max(1.0, abs(top))
    while secular(lo) < 0:
        lo = top + (lo - top) / 10
        if lo - top < 1e-300:
            break
    mu = brentq(secular, lo, hi, xtol=1e-15, rtol=1e-15)
    u = g / (mu - lam)
    return q @ (u / np.linalg.norm(u))


def _local_search(c: np.ndarray, groups, starts) -> tuple[float, np.ndarray]:
    best_val, best = -np.inf, None
    for start in starts:
        x = start.copy()
        prev = -np.inf
        for _ in range(500):
            for g in groups:
                g = list(g)
                rest = [i for i in range(len(x)) if i not in g]
                b = c[np.ix_(g, rest)] @ x[rest]
                x[g] = _tr_sphere_max(c[np.ix_(g, g)], b)
            val = float(x @ c @ x)
            if val - prev < 1e-14 * max(1.0, abs(val)):
                break
            prev = val
        if val > best_val:
            best_val, best = val, x
    return best_val, best


def _group_normalised(v: np.ndarray, groups) -> np.ndarray | None:
    out = np.zeros_like(v)
    for g in groups:
        g = list(g)
        nrm = np.linalg.norm(v[g])
        if nrm < 1e-12:
            return None
        out[g] = v[g] / nrm
    return out


def _numeric_optimum(cov: CovarianceMatrix) -> LocalVarianceOptimum:
    c = np.asarray(cov.entries, dtype=float)
    groups = cov.groups
    dim = c.shape[0]
    cross = max(
        (np.abs(c[np.ix_(list(g), list(h))]).max() for g in groups for h in groups if g != h),
        default=0.0,
    )
    if cross < 1e-12:
        x = np.zeros(dim)
        total = 0.0
        for g in groups:
            lam, vec = np.linalg.eigh(c[np.ix_(list(g), list(g))])
            total += lam[-1]
            x[list(g)] = vec[:, -1]
        return LocalVarianceOptimum(float(total), x, "separable", cov)

    weights = np.zeros(dim)
    for g, w in zip(groups, cov.weights):
        weights[list(g)] = w
    lam, vecs = scipy.linalg.eigh(c, np.diag(weights))
    total_weight = float(sum(cov.weights))
    top = lam[-1]
    tol = 1e-9 * max(1.0, abs(top))
    for idx in np.flatnonzero(lam >= top - tol)[::-1]:
        v = vecs[:, idx]
        v = v * math.sqrt(total_weight / float(v @ (weights * v)))
        if all(abs(np.linalg.norm(v[list(g)]) - 1) < 1e-9 for g in groups):
            return LocalVarianceOptimum(float(top * total_weight), v, "aggregate", cov)

    starts = []
    for idx in range(dim):
        s = _group_normalised(vecs[:, idx], groups)
        if s is not None:
            starts.append(s)
    rng = np.random.default_rng(0)
    for _ in range(8):
        s = _group_normalised(rng.standard_normal(dim), groups)
        starts.append(s)
    val, x = _local_search(c, groups, starts)
    return LocalVarianceOptimum(val, x, "local-search", cov)


def _exact_components(mat, indices):
    """Connected components of the nonzero pattern of ``mat`` restricted to ``indices``."""
    indices = list(indices)
    seen, comps = set(), []
    for i in indices:
        if i in seen:
            continue
        stack, comp = [i], []
        seen.add(i)
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in indices:
                if b not in seen and mat[a, b] != 0:
                    seen.add(b)
                    stack.append(b)
        comps.append(sorted(comp))
    return comps


def _exact_top_eigen(mat, indices, weights=None):
    """Largest eigenvalue of ``W^-1 C`` over ``indices`` and a basis of its eigenvectors."""
    import sympy

    best, vectors = None, []
    for comp in _exact_components(mat, indices):
        block = mat.extract(comp, comp)
        if weights is not None:
            block = sympy.diag(*[sympy.Rational(1, weights[i]) for i in comp]) * block
        for val, _mult, vecs in block.eigenvects():
            val = sympy.nsimplify(sympy.simplify(val))
            full = []
            for v in vecs:
                f = sympy.zeros(mat.shape[0], 1)
                for pos, i in enumerate(comp):
                    f[i] = sympy.simplify(v[pos])
                full.append(f)
            if best is None or float(val) > float(best) + 1e-12:
                best, vectors = val, full
            elif abs(float(val) - float(best)) <= 1e-12 and sympy.simplify(val - best) == 0:
                vectors += full
    return best, vectors


def _exact_optimum(cov: CovarianceMatrix) -> LocalVarianceOptimum:
    import sympy

    c = cov.entries
    groups = cov.groups
    dim = c.shape[0]
    separable = all(
        c[i, j] == 0 for g in groups for h in groups if g != h for i in g for j in h
    )
    if separable:
        total = sympy.Integer(0)
        x = sympy.zeros(dim, 1)
        for g in groups:
            val, vecs = _exact_top_eigen(c, g)
            total += val
            v = vecs[0]
            x += v / sympy.sqrt(sum(v[i] ** 2 for i in g))
        return LocalVarianceOptimum(sympy.nsimplify(total), x, "separable", cov)

    weights = {}
    for g, w in zip(groups, cov.weights):
        for i in g:
            weights[i] = w
    top, vecs = _exact_top_eigen(c, range(dim), weights)
    total_weight = sum(cov.weights)
    for v in vecs:
        norm = sum(weights[i] * v[i] ** 2 for i in range(dim))
        v = v * sympy.sqrt(sympy.Rational(total_weight) / norm)
        v = v.applyfunc(sympy.simplify)
        if all(sympy.simplify(sum(v[i] ** 2 for i in g) - 1) == 0 for g in groups):
            return LocalVarianceOptimum(sympy.nsimplify(top * total_weight), v, "aggregate", cov)
    raise ConsistencyError("no exact optimality certificate; use exact=False for a local search")


def max_local_variance(state, exact: bool = False) -> LocalVarianceOptimum:
    """Largest variance of ``sum_groups sum_j alpha_{g,j} sum_{i in g} sigma_j^(i)``.

    Every qubit carries a unit-norm coefficient vector ``alpha_g``, i.e. the
    observable is a sum of local terms of equal operator norm.
    """
    cov = covariance_matrix(state, exact=exact)
    return _exact_optimum(cov) if exact else _numeric_optimum(cov)


# -- summary -----------------------------------------------------------------


@dataclass(frozen=True)
class EffectiveSizeReport:
    n_qubits: int
    korsbakken: float
    marquardt: float
    relative_fisher: float
    index_p_size: float
    fisher_size: float
    max_variance: float
    max_variance_branch: float


def effective_sizes(n_qubits: int, threshold: float = 0.99, exact: bool = False) -> EffectiveSizeReport:
    """All five effective sizes of the cloned micro-macro state.

    The relative Fisher size compares the best local variance of the whole
    state with that of the branch ``|+> (x) |psi^->``; the index-p and Fisher
    sizes divide the best variance (a quarter of the pure-state QFI) by ``n``.
    """
    n = _check_odd(n_qubits)
    psi = micro_macro_state(n)
    phi0 = MicroMacroState(
        np.array([1.0, 0.0]), cloner_state(n, -1), cloner_state(n, +1), exact_micro=(1, 0)
    )
    v_psi = max_local_variance(psi, exact=exact).variance
    v_phi0 = max_local_variance(phi0, exact=exact).variance
    if exact:
        import sympy

        ratio = sympy.nsimplify(v_psi / v_phi0)
        per_n = sympy.nsimplify(v_psi / n)
        fisher = sympy.nsimplify(4 * v_psi / (4 * n))
    else:
        ratio = v_psi / v_phi0
        per_n = v_psi / n
        fisher = 4 * v_psi / (4 * n)
    return EffectiveSizeReport(
        n,
        korsbakken_effective_size(n, threshold),
        float(marquardt_check(n)),
        ratio,
        per_n,
        fisher,
        v_psi,
        v_phi0,
    )
