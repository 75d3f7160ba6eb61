"""Brute-force simulation on the full ``2**n`` dimensional Hilbert space.

Everything here works with explicit state vectors and density matrices and is
deliberately independent of the closed-form expressions in the other modules,
which it is used to validate.  Qubit 0 is the most significant bit of the
computational-basis index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CapacityError
from .symcore import Axis, DickeBasisLabel, MicroMacroState, SymmetricPureState, _axis

#: Largest qubit number for explicit state vectors.
MAX_STATE_QUBITS = 12
#: Largest qubit number for explicit density matrices.
MAX_DENSITY_QUBITS = 10

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _check_state_capacity(n: int) -> None:
    if n > MAX_STATE_QUBITS:
        raise CapacityError(
            f"{n} qubits exceeds the state-vector cap of {MAX_STATE_QUBITS}; "
            "use the symmetric-subspace routines instead"
        )


def _check_density_capacity(n: int) -> None:
    if n > MAX_DENSITY_QUBITS:
        raise CapacityError(
            f"{n} qubits exceeds the density-matrix cap of {MAX_DENSITY_QUBITS}; "
            "use the analytic routines instead"
        )


def _n_from_dim(dim: int) -> int:
    n = int(round(math.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class FullStateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_state_capacity(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError("amplitude vector has the wrong length")
        if abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise ValueError("state vector is not normalised")
        object.__setattr__(self, "amplitudes", amps)

    def density(self) -> "FullDensityMatrix":
        return FullDensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class FullDensityMatrix:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_density_capacity(self.n_qubits)
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2**self.n_qubits,) * 2:
            raise ValueError("density matrix has the wrong shape")
        object.__setattr__(self, "matrix", m)

    def is_valid(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        if abs(np.trace(m) - 1) > tol or not np.allclose(m, m.conj().T, atol=tol):
            return False
        return float(np.linalg.eigvalsh(m).min()) >= -tol


# -- construction ------------------------------------------------------------


def popcounts(n_qubits: int) -> np.ndarray:
    """Hamming weight of every computational-basis index."""
    return np.bitwise_count(np.arange(2**n_qubits, dtype=np.uint64)).astype(int)


def hadamard_all(vector: np.ndarray) -> np.ndarray:
    """Apply ``Had`` to every qubit of a state vector."""
    n = _n_from_dim(vector.shape[0])
    psi = vector.reshape((2,) * n)
    for q in range(n):
        psi = np.moveaxis(np.tensordot(HADAMARD, psi, axes=([1], [q])), 0, q)
    return psi.reshape(-1)


def embed_dicke(label: DickeBasisLabel) -> FullStateVector:
    """Equal-weight superposition of the ``C(n, k)`` permutations."""
    n, k = label.n_qubits, label.excitations
    _check_state_capacity(n)
    mask = popcounts(n) == k
    vec = np.zeros(2**n, dtype=complex)
    vec[mask] = 1 / math.sqrt(mask.sum())
    if label.axis is Axis.X:
        vec = hadamard_all(vec)
    return FullStateVector(n, vec)


def embed_symmetric(state: SymmetricPureState) -> FullStateVector:
    n = state.n_qubits
    _check_state_capacity(n)
    vec = np.zeros(2**n, dtype=complex)
    for k, amp in enumerate(state.amplitudes):
        if amp != 0:
            vec += amp * embed_dicke(DickeBasisLabel(n, k, state.axis)).amplitudes
    return FullStateVector(n, vec / np.linalg.norm(vec))


def embed_micro_macro(state: MicroMacroState) -> FullStateVector:
    """Micro qubit first, then the ``n`` macro qubits."""
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    a, b = state.micro_amplitudes
    vec = a * np.kron(plus, embed_symmetric(state.macro_plus).amplitudes) + b * np.kron(
        minus, embed_symmetric(state.macro_minus).amplitudes
    )
    return FullStateVector(state.n_macro + 1, vec)


def local_operator(n_qubits: int, site: int, op: np.ndarray) -> np.ndarray:
    """``op`` on qubit ``site`` embedded in ``n_qubits``."""
    return np.kron(np.kron(np.eye(2**site), op), np.eye(2 ** (n_qubits - site - 1)))


def collective_operator(n_qubits: int, axis, sites=None) -> np.ndarray:
    """``sum_{i in sites} sigma_axis^(i)`` as a dense matrix."""
    p = PAULI[_axis(axis).value]
    sites = range(n_qubits) if sites is None else sites
    out = np.zeros((2**n_qubits,) * 2, dtype=complex)
    for s in sites:
        out += local_operator(n_qubits, s, p)
    return out


def collective_rotation(n_qubits: int, axis, angle: float) -> np.ndarray:
    """``exp(-i angle/2 sum_i sigma_axis^(i))`` built as a Kronecker power."""
    single = scipy.linalg.expm(-0.5j * angle * PAULI[_axis(axis).value])
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n_qubits):
        out = np.kron(out, single)
    return out


def weight_projector_diagonals(n_qubits: int) -> np.ndarray:
    """Row ``i`` is the diagonal of the projector onto Hamming weight ``i``."""
    w = popcounts(n_qubits)
    return (w[None, :] == np.arange(n_qubits + 1)[:, None]).astype(float)


# -- channels and reductions -------------------------------------------------


def channel_kraus(kind: str, parameter: float) -> list[np.ndarray]:
    """Single-qubit Kraus operators.

    ``phase_z`` and ``bitflip_x`` keep the state with probability ``u`` and
    apply the Pauli otherwise; ``white`` is ``p rho + (1-p)/4 sum_j s_j rho s_j``.
    """
    kind = kind.lower()
    if kind in ("phase_z", "bitflip_x"):
        u = parameter
        if not 0 <= u <= 1:
            raise ValueError("u must lie in [0, 1]")
        pauli = PAULI["z" if kind == "phase_z" else "x"]
        return [math.sqrt(u) * PAULI["i"], math.sqrt(1 - u) * pauli]
    if kind == "white":
        p = parameter
        if not 0 <= p <= 1:
            raise ValueError("p must lie in [0, 1]")
        out = [math.sqrt(p + (1 - p) / 4) * PAULI["i"]]
        out += [math.sqrt((1 - p) / 4) * PAULI[a] for a in "xyz"]
        return out
    raise ValueError(f"unknown channel {kind!r}")


def _apply_on_qubit(tensor: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, tensor, axes=([1], [axis])), 0, axis)


def apply_local_channel(rho: FullDensityMatrix, kind: str, parameter: float) -> FullDensityMatrix:
    """Apply the same single-qubit channel independently to every qubit.

    Qubits are processed in index order; the single-qubit maps act on
    distinct tensor factors and commute.
    """
    n = rho.n_qubits
    kraus = channel_kraus(kind, parameter)
    t = rho.matrix.reshape((2,) * (2 * n))
    for q in range(n):
        t = sum(_apply_on_qubit(_apply_on_qubit(t, k, q), k.conj(), n + q) for k in kraus)
    return FullDensityMatrix(n, t.reshape(2**n, 2**n))


def partial_trace(state, kept) -> FullDensityMatrix:
    """Reduced density matrix on the qubits in ``kept`` (order preserved)."""
    if isinstance(state, FullStateVector):
        m = np.outer(state.amplitudes, state.amplitudes.conj())
        n = state.n_qubits
    else:
        m = state.matrix
        n = state.n_qubits
    kept = sorted(int(q) for q in kept)
    _check_density_capacity(len(kept))
    traced = [q for q in range(n) if q not in kept]
    t = m.reshape((2,) * (2 * n))
    # Trace pairs from the highest index down so earlier axis numbers stay valid.
    for q in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + cur)
    d = 2 ** len(kept)
    return FullDensityMatrix(len(kept), t.reshape(d, d))


def symmetric_isometry(n_qubits: int) -> np.ndarray:
    """Columns are the z-Dicke states ``|n, k>`` in the full space."""
    return np.stack(
        [embed_dicke(DickeBasisLabel(n_qubits, k)).amplitudes for k in range(n_qubits + 1)], axis=1
    )


def expectation(state: FullStateVector, op: np.ndarray) -> complex:
    v = state.amplitudes
    return complex(np.vdot(v, op @ v))


def covariance(state: FullStateVector, ops) -> np.ndarray:
    """``Re <dA dB>`` for the listed operators."""
    v = state.amplitudes
    shifted = []
    for op in ops:
        mean = np.vdot(v, op @ v)
        shifted.append(op @ v - mean * v)
    k = len(ops)
    out = np.empty((k, k))
    for a in range(k):
        for b in range(k):
            out[a, b] = np.vdot(shifted[a], shifted[b]).real
    return out


# -- quantum Fisher information -----------------------------------------------


def sld_quantum_fisher(rho, generator: np.ndarray, cutoff: float = 1e-12) -> float:
    """QFI of ``exp(-i theta H) rho exp(i theta H)`` from the symmetric logarithmic derivative.

    Solves ``(L rho + rho L) / 2 = d rho`` with ``d rho = -i [H, rho]``.  On
    the support of ``rho`` this is a Lyapunov equation; the support-kernel
    block follows from a linear solve.  Returns ``Tr(rho L^2)``.
    """
    m = rho.matrix if isinstance(rho, FullDensityMatrix) else np.asarray(rho, dtype=complex)
    m = 0.5 * (m + m.conj().T)
    drho = -1j * (generator @ m - m @ generator)
    w, v = np.linalg.eigh(m)
    support = w > cutoff
    vs, vk = v[:, support], v[:, ~support]
    rho_s = vs.conj().T @ m @ vs
    d_ss = vs.conj().T @ drho @ vs
    d_sk = vs.conj().T @ drho @ vk
    l_ss = scipy.linalg.solve_continuous_lyapunov(0.5 * rho_s, d_ss)
    l_sk = 2 * np.linalg.solve(rho_s, d_sk)
    value = np.trace(rho_s @ (l_ss @ l_ss + l_sk @ l_sk.conj().T))
    return float(value.real)
