"""Permutation-symmetric qubit states in the Dicke basis.

States of ``n`` qubits that are invariant under particle exchange are stored as
length ``n + 1`` amplitude vectors indexed by the excitation number ``k``
(the number of ``|1>`` factors).  The same vector can be expressed in the
collective x basis ``|n, k>_x = Had^{(x)n} |n, k>`` where ``k`` counts ``|->``
factors.

Sign conventions: ``sigma_z |0> = +|0>``, so the collective ``M_z`` acts on
``|n, k>`` as ``n - 2k``.  With this choice ``M_z |n, (n -+ 1)/2> = +-|n,
(n -+ 1)/2>`` and ``(sigma_z (x) M_z)`` maps ``|+> (x) |psi^->`` exactly onto
``|-> (x) |psi^+>``; ``tests/test_symcore.py`` asserts both.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import UnsupportedInputError

__all__ = [
    "Axis",
    "DickeBasisLabel",
    "SymmetricPureState",
    "MicroMacroState",
    "ReducedState",
    "CollectiveObservable",
    "EXACT_BINOMIAL_LIMIT",
    "log_binomial",
    "krawtchouk",
    "dicke_basis_change",
    "dicke_state",
    "cloner_state",
    "micro_macro_state",
    "x_basis_coefficients",
    "x_basis_weights",
    "split_coefficients",
    "bipartite_split",
    "reduced_state",
    "reduced_operator",
    "collective_matrix",
    "expectation_and_variance",
    "trace_norm",
]

#: Largest ``n`` for which split coefficients use exact rational arithmetic.
EXACT_BINOMIAL_LIMIT = 64

NORM_TOL = 1e-12


class Axis(str, enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"


def _axis(value) -> Axis:
    return value if isinstance(value, Axis) else Axis(str(value).lower())


def _check_odd(n_qubits: int) -> int:
    n = int(n_qubits)
    if n < 1 or n % 2 == 0:
        raise UnsupportedInputError(
            f"n_qubits must be a positive odd integer, got {n_qubits!r}; "
            "the cloner map is only modelled for odd qubit numbers"
        )
    return n


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be +1/-1 or '+'/'-', got {sign!r}")


# -- basic types -------------------------------------------------------------


@dataclass(frozen=True)
class DickeBasisLabel:
    n_qubits: int
    excitations: int
    axis: Axis = Axis.Z

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if not 0 <= self.excitations <= self.n_qubits:
            raise ValueError(
                f"excitations must lie in [0, {self.n_qubits}], got {self.excitations}"
            )
        object.__setattr__(self, "axis", _axis(self.axis))
        if self.axis is Axis.Y:
            raise ValueError("Dicke labels are defined for the z and x axes only")


@dataclass(frozen=True, eq=False)
class SymmetricPureState:
    """Pure permutation-symmetric state as Dicke amplitudes.

    ``exact`` optionally carries the amplitudes as sympy expressions so that
    quadratic quantities can be evaluated in exact arithmetic.
    """

    n_qubits: int
    axis: Axis
    amplitudes: np.ndarray
    exact: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.n_qubits + 1,):
            raise ValueError(
                f"expected {self.n_qubits + 1} amplitudes, got shape {amps.shape}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "axis", _axis(self.axis))
        if self.axis is Axis.Y:
            raise ValueError("only z- and x-axis Dicke expansions are supported")

    def in_axis(self, axis) -> "SymmetricPureState":
        """Return the same state expanded in the Dicke basis of ``axis``."""
        axis = _axis(axis)
        if axis is self.axis:
            return self
        # Had^{(x)n} restricted to the symmetric subspace is real symmetric and
        # involutive, so the same matrix maps z -> x and x -> z.
        amps = dicke_basis_change(self.n_qubits) @ self.amplitudes
        amps = amps / np.linalg.norm(amps)
        return SymmetricPureState(self.n_qubits, axis, amps)

    def overlap(self, other: "SymmetricPureState") -> complex:
        other = other.in_axis(self.axis)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class MicroMacroState:
    """``a |+> (x) macro_plus + b |-> (x) macro_minus`` on ``1 + n`` qubits."""

    micro_amplitudes: np.ndarray
    macro_plus: SymmetricPureState
    macro_minus: SymmetricPureState
    exact_micro: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        micro = np.asarray(self.micro_amplitudes, dtype=complex)
        if micro.shape != (2,):
            raise ValueError("micro_amplitudes must have length 2")
        if self.macro_plus.n_qubits != self.macro_minus.n_qubits:
            raise ValueError("macro components must have the same qubit number")
        if abs(float(np.vdot(micro, micro).real) - 1.0) > NORM_TOL:
            raise ValueError("micro amplitudes are not normalised")
        micro.setflags(write=False)
        object.__setattr__(self, "micro_amplitudes", micro)
        object.__setattr__(self, "macro_plus", self.macro_plus.in_axis(Axis.Z))
        object.__setattr__(self, "macro_minus", self.macro_minus.in_axis(Axis.Z))
        both = np.all(micro != 0)
        if both and abs(self.macro_plus.overlap(self.macro_minus)) > 1e-12:
            raise ValueError("macro components must be orthogonal")

    @property
    def n_macro(self) -> int:
        return self.macro_plus.n_qubits

    def vector(self) -> np.ndarray:
        """Amplitudes on ``{|0>, |1>} (x) {|n, k>}``, micro index major."""
        plus = np.array([1.0, 1.0]) / math.sqrt(2)
        minus = np.array([1.0, -1.0]) / math.sqrt(2)
        a, b = self.micro_amplitudes
        return a * np.kron(plus, self.macro_plus.amplitudes) + b * np.kron(
            minus, self.macro_minus.amplitudes
        )

    def exact_vector(self):
        """Exact (sympy) counterpart of :meth:`vector`, or ``None``."""
        if (
            self.exact_micro is None
            or self.macro_plus.exact is None
            or self.macro_minus.exact is None
        ):
            return None
        import sympy

        r = 1 / sympy.sqrt(2)
        a, b = self.exact_micro
        p, m = self.macro_plus.exact, self.macro_minus.exact
        top = [sympy.expand(a * r * x + b * r * y) for x, y in zip(p, m)]
        bottom = [sympy.expand(a * r * x - b * r * y) for x, y in zip(p, m)]
        return top + bottom

    def components(self) -> tuple[np.ndarray, np.ndarray]:
        """The two branches ``a|+>macro_plus`` and ``b|->macro_minus`` unnormalised."""
        plus = np.array([1.0, 1.0]) / math.sqrt(2)
        minus = np.array([1.0, -1.0]) / math.sqrt(2)
        a, b = self.micro_amplitudes
        return (
            a * np.kron(plus, self.macro_plus.amplitudes),
            b * np.kron(minus, self.macro_minus.amplitudes),
        )


@dataclass(frozen=True, eq=False)
class ReducedState:
    k: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.k + 1, self.k + 1):
            raise ValueError("matrix must be (k+1) x (k+1)")
        object.__setattr__(self, "matrix", m)

    def is_valid(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        if abs(np.trace(m).real - 1.0) > 1e-12 or not np.allclose(m, m.conj().T):
            return False
        return float(np.linalg.eigvalsh(m).min()) >= -tol


@dataclass(frozen=True)
class CollectiveObservable:
    """``weight * sum_i sigma_axis^(i)``."""

    axis: Axis
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "axis", _axis(self.axis))

    def matrix(self, n_qubits: int) -> np.ndarray:
        return self.weight * collective_matrix(n_qubits, self.axis)


# -- combinatorics -----------------------------------------------------------


def log_binomial(n: int, k: int) -> float:
    """Natural log of ``C(n, k)``.

    Exact big-integer evaluation for ``n <= 64``; log-gamma beyond.
    """
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"log_binomial requires 0 <= k <= n, got n={n}, k={k}")
    if n <= EXACT_BINOMIAL_LIMIT:
        return math.log(math.comb(n, k))
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def _log_binom_array(n, k):
    """Vectorised ``log C(n, k)`` with ``-inf`` outside the support."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    valid = (k >= 0) & (k <= n) & (n >= 0)
    safe_k = np.where(valid, k, 0.0)
    safe_n = np.where(valid, n, 0.0)
    out = gammaln(safe_n + 1) - gammaln(safe_k + 1) - gammaln(safe_n - safe_k + 1)
    return np.where(valid, out, -np.inf)


def krawtchouk(n: int, j: int, l: int) -> int:
    """Exact ``sum_m (-1)^m C(l, m) C(n - l, j - m)``."""
    lo, hi = max(0, j - (n - l)), min(l, j)
    return sum((-1) ** m * math.comb(l, m) * math.comb(n - l, j - m) for m in range(lo, hi + 1))


def _signed_sqrt_ratio(num: int, den: int, sign: int) -> float:
    return sign * math.sqrt(num / den) if num else 0.0


@lru_cache(maxsize=64)
def _basis_change(n: int) -> np.ndarray:
    out = np.empty((n + 1, n + 1))
    two_n = 2**n
    for j in range(n + 1):
        cj = math.comb(n, j)
        for l in range(j, n + 1):
            kr = krawtchouk(n, j, l)
            val = _signed_sqrt_ratio(math.comb(n, l) * kr * kr, two_n * cj, 1 if kr >= 0 else -1)
            out[j, l] = val
            out[l, j] = val
    out.setflags(write=False)
    return out


def dicke_basis_change(n_qubits: int) -> np.ndarray:
    """Matrix ``B[j, l] = <n, j | n, l>_x`` of ``Had^{(x)n}`` on the symmetric subspace.

    Entries come from exact integer Krawtchouk sums, so there is no
    cancellation error at large ``n``.
    """
    return _basis_change(int(n_qubits))


# -- states ------------------------------------------------------------------


def dicke_state(n_qubits: int, excitations: int, axis=Axis.Z) -> SymmetricPureState:
    label = DickeBasisLabel(n_qubits, excitations, _axis(axis))
    amps = np.zeros(n_qubits + 1)
    amps[label.excitations] = 1.0
    exact = tuple(1 if k == excitations else 0 for k in range(n_qubits + 1))
    return SymmetricPureState(n_qubits, label.axis, amps, exact=exact)


def cloner_state(n_qubits: int, sign) -> SymmetricPureState:
    """Output ``|psi^+->`` of the optimal phase-covariant cloner fed with ``|+->``.

    Equal-weight superposition of the two central Dicke states
    ``|n, (n-1)/2>`` and ``|n, (n+1)/2>`` with relative sign ``sign``.
    """
    n = _check_odd(n_qubits)
    s = _sign(sign)
    a = (n - 1) // 2
    amps = np.zeros(n + 1)
    amps[a] = 1 / math.sqrt(2)
    amps[a + 1] = s / math.sqrt(2)
    import sympy

    r = 1 / sympy.sqrt(2)
    exact = tuple(r if k == a else s * r if k == a + 1 else sympy.Integer(0) for k in range(n + 1))
    return SymmetricPureState(n, Axis.Z, amps, exact=exact)


def micro_macro_state(n_qubits: int) -> MicroMacroState:
    """``(|+> (x) |psi^-> - |-> (x) |psi^+>) / sqrt(2)`` on ``n + 1`` qubits."""
    n = _check_odd(n_qubits)
    import sympy

    r = 1 / sympy.sqrt(2)
    return MicroMacroState(
        np.array([1.0, -1.0]) / math.sqrt(2),
        cloner_state(n, -1),
        cloner_state(n, +1),
        exact_micro=(r, -r),
    )


@lru_cache(maxsize=256)
def _x_weights(n: int) -> tuple[Fraction, ...]:
    a = (n - 1) // 2
    den = 2**n * math.comb(n, a)
    return tuple(
        Fraction(math.comb(n, k) * krawtchouk(n, a, k) ** 2, den) for k in range(n + 1)
    )


def x_basis_weights(n_qubits: int) -> tuple[Fraction, ...]:
    """Exact ``C(n, k) beta_k^2`` for ``k = 0..n``.

    ``|psi^+->`` has x-basis probability ``2 C(n,k) beta_k^2`` on even
    (respectively odd) ``k`` and zero on the other parity.
    """
    return _x_weights(_check_odd(n_qubits))


def x_basis_coefficients(n_qubits: int) -> np.ndarray:
    """``beta_k`` such that ``|psi^+-> = sum_k (1 +- (-1)^k)/sqrt(2) sqrt(C(n,k)) beta_k |n,k>_x``.

    ``beta_k = K_k / sqrt(2^n C(n, (n-1)/2))`` with the Krawtchouk sum
    ``K_k = sum_i (-1)^i C(k, i) C(n-k, (n-1)/2 - i)``.
    """
    n = _check_odd(n_qubits)
    a = (n - 1) // 2
    den = 2**n * math.comb(n, a)
    out = np.empty(n + 1)
    for k in range(n + 1):
        kr = krawtchouk(n, a, k)
        out[k] = _signed_sqrt_ratio(kr * kr, den, 1 if kr >= 0 else -1)
    return out


# -- bipartite splitting -----------------------------------------------------


def split_coefficients(n_qubits: int, k: int, x: int, *, exact: bool | None = None) -> np.ndarray:
    """``c_j^x = C(k, j) C(n-k, x-j) / C(n, x)`` for ``j = 0..k``.

    These are the squared amplitudes of ``|n, x>`` on ``|k, j> (x) |n-k, x-j>``.
    ``exact=None`` picks rational arithmetic for ``n <= 64`` and log-gamma
    arithmetic above.
    """
    n = int(n_qubits)
    if not 0 <= k <= n:
        raise ValueError(f"subgroup size must lie in [0, {n}], got {k}")
    if not 0 <= x <= n:
        raise ValueError(f"excitation number must lie in [0, {n}], got {x}")
    if exact is None:
        exact = n <= EXACT_BINOMIAL_LIMIT
    j = np.arange(k + 1)
    if exact:
        den = math.comb(n, x)
        return np.array(
            [
                float(Fraction(math.comb(k, jj) * math.comb(n - k, x - jj), den))
                if 0 <= x - jj <= n - k
                else 0.0
                for jj in range(k + 1)
            ]
        )
    logc = _log_binom_array(k, j) + _log_binom_array(n - k, x - j) - log_binomial(n, x)
    return np.exp(logc)


def bipartite_split(state: SymmetricPureState, k: int) -> dict[int, np.ndarray]:
    """Split coefficients ``c_j^x`` for every excitation ``x`` in the support of ``state``."""
    state = state.in_axis(Axis.Z)
    support = np.flatnonzero(np.abs(state.amplitudes) > 0)
    return {int(x): split_coefficients(state.n_qubits, k, int(x)) for x in support}


def reduced_state(n_qubits: int, sign, k: int, mode: str = "exact") -> ReducedState:
    """Reduced state of ``|psi^+->`` on ``k`` of the ``n`` cloned qubits.

    Tridiagonal on the ``k``-qubit symmetric subspace.  ``mode="asymptotic"``
    replaces ``c_j`` by their large-``n`` limit ``C(k, j) / 2^k``.
    """
    n = _check_odd(n_qubits)
    s = _sign(sign)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    a, b = (n - 1) // 2, (n + 1) // 2
    if mode == "exact":
        ca = split_coefficients(n, k, a)
        cb = split_coefficients(n, k, b)
        diag = 0.5 * (ca + cb)
        off = 0.5 * np.sqrt(ca[:-1] * cb[1:])
    elif mode == "asymptotic":
        j = np.arange(k + 1)
        logc = _log_binom_array(k, j) - k * math.log(2)
        diag = np.exp(logc)
        off = 0.5 * np.exp(0.5 * (logc[:-1] + logc[1:]))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    m = np.diag(diag).astype(complex)
    m += s * (np.diag(off, 1) + np.diag(off, -1))
    return ReducedState(k, m)


def reduced_operator(ket: SymmetricPureState, bra: SymmetricPureState, k: int) -> np.ndarray:
    """``Tr_{n-k} |ket><bra|`` on the ``k``-qubit symmetric subspace."""
    ket = ket.in_axis(Axis.Z)
    bra = bra.in_axis(Axis.Z)
    n = ket.n_qubits
    if bra.n_qubits != n:
        raise ValueError("states must have equal qubit number")
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    out = np.zeros((k + 1, k + 1), dtype=complex)
    # Amplitude of |n,x> on |k,j>|n-k,x-j> is sqrt(c_j^x); the traced factor
    # forces x - j == x' - j'.
    ket_support = np.flatnonzero(ket.amplitudes)
    bra_support = np.flatnonzero(bra.amplitudes)
    roots = {int(x): np.sqrt(split_coefficients(n, k, int(x))) for x in set(ket_support) | set(bra_support)}
    for x in ket_support:
        for xp in bra_support:
            shift = int(xp - x)
            weight = ket.amplitudes[x] * np.conj(bra.amplitudes[xp])
            rx, rxp = roots[int(x)], roots[int(xp)]
            for j in range(k + 1):
                jp = j + shift
                if 0 <= jp <= k:
                    out[j, jp] += weight * rx[j] * rxp[jp]
    return out


# -- observables -------------------------------------------------------------


def collective_matrix(n_qubits: int, axis) -> np.ndarray:
    """``sum_i sigma_axis^(i)`` on the ``n``-qubit symmetric subspace (z-Dicke basis)."""
    axis = _axis(axis)
    n = int(n_qubits)
    k = np.arange(n + 1)
    if axis is Axis.Z:
        return np.diag(n - 2.0 * k).astype(complex)
    up = np.sqrt((k[:-1] + 1.0) * (n - k[:-1]))  # <k+1| sum sigma^+ |k>
    if axis is Axis.X:
        return (np.diag(up, -1) + np.diag(up, 1)).astype(complex)
    return 1j * np.diag(up, -1) - 1j * np.diag(up, 1)


def expectation_and_variance(state: SymmetricPureState, observable: CollectiveObservable) -> tuple[float, float]:
    if not isinstance(observable, CollectiveObservable):
        observable = CollectiveObservable(observable)
    vec = state.in_axis(Axis.Z).amplitudes
    m = observable.matrix(state.n_qubits)
    mv = m @ vec
    mean = float(np.vdot(vec, mv).real)
    second = float(np.vdot(mv, mv).real)
    return mean, max(second - mean * mean, 0.0)


def trace_norm(matrix: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.abs(np.linalg.eigvalsh(matrix)).sum())
