"""Analytic formulas against brute-force simulation at small qubit numbers.

Each check draws random parameters, evaluates the closed form and the
full-Hilbert-space simulation of :mod:`clonemacro.oracle`, and reports the
largest deviation.  A deliberately corrupted formula is included as a canary:
it must be caught, otherwise the harness itself is not sensitive enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distinguish, macromeasures, metrology, oracle
from .symcore import DickeBasisLabel, _check_odd, cloner_state, micro_macro_state, reduced_state

__all__ = ["CheckResult", "run_checks", "oracle_distinguishability", "MAX_CHECK_QUBITS"]

#: Largest qubit number accepted by :func:`run_checks`.
MAX_CHECK_QUBITS = 7


@dataclass(frozen=True)
class CheckResult:
    """``passed`` means agreement for ordinary checks and detection for canaries."""

    name: str
    n_qubits: int
    n_points: int
    max_deviation: float
    tolerance: float
    canary: bool = False

    @property
    def passed(self) -> bool:
        if self.canary:
            return self.max_deviation > self.tolerance
        return self.max_deviation <= self.tolerance


def _x_counts(n: int, diag_weights: np.ndarray) -> np.ndarray:
    return np.bincount(oracle.popcounts(n), weights=diag_weights, minlength=n + 1)


def _x_basis_diag(rho: np.ndarray) -> np.ndarray:
    n = oracle._n_from_dim(rho.shape[0])
    had = np.ones((1, 1))
    for _ in range(n):
        had = np.kron(had, oracle.HADAMARD)
    return np.diag(had @ rho @ had.conj().T).real


def _oracle_cloner_x_probs(n: int, u: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    out = []
    for sign in (1, -1):
        rho = oracle.embed_symmetric(cloner_state(n, sign)).density()
        if u < 1:
            rho = oracle.apply_local_channel(rho, "phase_z", u)
        out.append(_x_counts(n, _x_basis_diag(rho.matrix)))
    return out[0], out[1]


def oracle_distinguishability(n: int, scenario: str, parameter: float | None = None) -> float:
    """Brute-force ``1/2 + Delta/4`` for one read-out of the two cloner outputs.

    ``scenario`` is ``"sharp"``, ``"pair"``, ``"povm"`` (``parameter`` is
    sigma) or ``"noise"`` (``parameter`` is the keep probability ``u``).
    """
    if n > MAX_CHECK_QUBITS:
        raise ValueError(f"oracle distinguishability is limited to n <= {MAX_CHECK_QUBITS}")
    plus, minus = _oracle_cloner_x_probs(n, parameter if scenario == "noise" else 1.0)
    if scenario == "pair":
        plus, minus = (np.add.reduceat(p, np.arange(0, n + 1, 2)) for p in (plus, minus))
    elif scenario == "povm":
        w = distinguish.povm_weights(n, parameter)
        plus, minus = w @ plus, w @ minus
    elif scenario not in ("sharp", "noise"):
        raise ValueError(f"unknown scenario {scenario!r}")
    return 0.5 + 0.25 * math.fsum(np.abs(plus - minus))


def _check_sharp(n, rng, n_points):
    plus, minus = _oracle_cloner_x_probs(n)
    dist = distinguish.sharp_probabilities(n)
    dev = max(np.abs(plus - dist.probs_plus).max(), np.abs(minus - dist.probs_minus).max())
    return [CheckResult("sharp", n, 1, float(dev), 1e-10)]


def _check_pair(n, rng, n_points):
    plus, minus = _oracle_cloner_x_probs(n)
    merged = [np.add.reduceat(p, np.arange(0, n + 1, 2)) for p in (plus, minus)]
    dist = distinguish.pair_coarsened_probabilities(n)
    dev = max(np.abs(merged[0] - dist.probs_plus).max(), np.abs(merged[1] - dist.probs_minus).max())
    return [CheckResult("pair", n, 1, float(dev), 1e-10)]


def _check_povm(n, rng, n_points):
    w = oracle.popcounts(n)
    states = [oracle.embed_symmetric(cloner_state(n, s)).density().matrix for s in (1, -1)]
    x_diag = [_x_basis_diag(m) for m in states]
    dev = comp = 0.0
    for sigma in rng.uniform(0.1, 3.0, n_points):
        # Kraus operators diagonal in the x basis: E_i(x) = exp(-(i-w)^2/(4 s^2)) / sqrt(n_w).
        i = np.arange(n + 1)[:, None]
        norm = np.exp(-((np.arange(n + 1)[:, None] - np.arange(n + 1)[None, :]) ** 2) / (2 * sigma**2)).sum(0)
        kraus = np.exp(-((i - w[None, :]) ** 2) / (4 * sigma**2)) / np.sqrt(norm[w])[None, :]
        comp = max(comp, float(np.abs((kraus**2).sum(0) - 1).max()))
        dist = distinguish.povm_probabilities(n, sigma)
        ref = [(kraus**2) @ d for d in x_diag]
        dev = max(dev, np.abs(ref[0] - dist.probs_plus).max(), np.abs(ref[1] - dist.probs_minus).max())
    return [
        CheckResult("povm", n, n_points, float(dev), 1e-10),
        CheckResult("povm-completeness", n, n_points, comp, 1e-10),
    ]


def _check_noise(n, rng, n_points):
    dev = 0.0
    for u in rng.uniform(0.5, 1.0, n_points):
        plus, minus = _oracle_cloner_x_probs(n, u)
        dist = distinguish.noisy_probabilities(n, u)
        dev = max(dev, np.abs(plus - dist.probs_plus).max(), np.abs(minus - dist.probs_minus).max())
    return [CheckResult("noise", n, n_points, float(dev), 1e-10)]


def _random_counting_points(rng, n_points):
    for _ in range(n_points):
        yield (
            float(rng.uniform(0.1, 2.0)),
            float(rng.uniform(0.05, 1.0)),
            float(rng.uniform(0.01, 3.0)),
            float(rng.uniform(0.0, math.pi / 2)),
            metrology.NoiseKind.BITFLIP if rng.random() < 0.5 else metrology.NoiseKind.WHITE,
        )


def _oracle_counting(n, omega, gamma, t, alpha, noise) -> np.ndarray:
    rho = oracle.embed_dicke(DickeBasisLabel(n, (n - 1) // 2)).density()
    decay = math.exp(-gamma * t)
    if noise is metrology.NoiseKind.BITFLIP:
        rho = oracle.apply_local_channel(rho, "bitflip_x", 0.5 * (1 + decay))
    else:
        rho = oracle.apply_local_channel(rho, "white", decay)
    # Evolve, then count |1>s in the basis exp(-i alpha sigma_x)|0>, |1>.
    u = oracle.collective_rotation(n, "x", omega * t - 2 * alpha)
    m = u @ rho.matrix @ u.conj().T
    return oracle.weight_projector_diagonals(n) @ np.diag(m).real


def _corrupted_weights(m: int, u: float) -> np.ndarray:
    r = np.arange(m + 1)
    return u ** (m - r) * u**r


def _check_counting(n, rng, n_points):
    dev = canary = 0.0
    for omega, gamma, t, alpha, noise in _random_counting_points(rng, n_points):
        ref = _oracle_counting(n, omega, gamma, t, alpha, noise)
        sc = metrology.EstimationScenario(n, omega, gamma, noise, measurement="rotated", alpha=alpha)
        dev = max(dev, float(np.abs(metrology.measurement_probabilities(sc, t) - ref).max()))
        u = metrology.flip_probability(noise, gamma, t)
        bad, _ = metrology._local_probs(n, [omega * t - 2 * alpha], u, flip_weights=_corrupted_weights)
        canary = max(canary, float(np.abs(bad[0] - ref).max()))
    return [
        CheckResult("counting", n, n_points, dev, 1e-10),
        CheckResult("counting-canary", n, n_points, canary, 1e-10, canary=True),
    ]


def _check_qfi(n, rng, n_points):
    dev = 0.0
    for _ in range(n_points):
        gamma, t = float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.05, 3.0))
        noise = metrology.NoiseKind.BITFLIP if rng.random() < 0.5 else metrology.NoiseKind.WHITE
        sc = metrology.EstimationScenario(n, 1.0, gamma, noise)
        spectral = metrology.quantum_fisher_information(sc, t)
        rho = metrology.evolved_state(sc, t, rotate=False)
        sld = oracle.sld_quantum_fisher(rho, 0.5 * t * oracle.collective_operator(n, "x"))
        dev = max(dev, abs(spectral - sld) / max(abs(sld), 1e-300))
    return [CheckResult("qfi-relative", n, n_points, dev, 1e-8)]


def _check_reduced(n, rng, n_points):
    dev = tdev = 0.0
    for k in range(1, n + 1):
        iso = oracle.symmetric_isometry(k)
        sym = []
        for sign in (1, -1):
            full = oracle.partial_trace(oracle.embed_symmetric(cloner_state(n, sign)), range(k))
            sym.append(iso.conj().T @ full.matrix @ iso)
            dev = max(dev, float(np.abs(sym[-1] - reduced_state(n, sign, k).matrix).max()))
        p_oracle = 0.5 + 0.25 * np.abs(np.linalg.eigvalsh(sym[0] - sym[1])).sum()
        p = macromeasures.subgroup_success_probability(n, k).probability
        tdev = max(tdev, abs(p - p_oracle))
    return [
        CheckResult("reduced-state", n, n, dev, 1e-12),
        CheckResult("subgroup", n, n, tdev, 1e-10),
    ]


def _check_covariance(n, rng, n_points):
    state = micro_macro_state(n)
    full = oracle.embed_micro_macro(state)
    size = n + 1
    ops = [oracle.collective_operator(size, a, [0]) for a in "xyz"]
    ops += [oracle.collective_operator(size, a, range(1, size)) for a in "xyz"]
    ref = oracle.covariance(full, ops)
    cov = macromeasures.covariance_matrix(state).entries
    return [CheckResult("covariance", n, 1, float(np.abs(ref - cov).max()), 1e-12)]


_CHECKS = (
    _check_sharp,
    _check_pair,
    _check_povm,
    _check_noise,
    _check_counting,
    _check_qfi,
    _check_reduced,
    _check_covariance,
)


def run_checks(n_values=(3, 5, 7), n_points: int = 20, seed: int = 0) -> list[CheckResult]:
    """Run every formula-versus-simulation check for each ``n`` in ``n_values``."""
    results = []
    for n in n_values:
        if n > MAX_CHECK_QUBITS:
            raise ValueError(f"cross-checks are limited to n <= {MAX_CHECK_QUBITS}, got {n}")
        _check_odd(n)
        for check in _CHECKS:
            rng = np.random.default_rng([seed, n, _CHECKS.index(check)])
            results.extend(check(n, rng, n_points))
    return results
