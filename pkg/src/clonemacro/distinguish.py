"""Distinguishing ``|psi^+>`` from ``|psi^->`` through imperfect collective-x measurements.

Outcome ``i`` of the collective x measurement is the number of qubits found
in ``|->``.  Three imperfections are modelled: merging neighbouring outcomes
into pairs, a Gaussian-blurred POVM, and independent phase flips on every
qubit before a sharp measurement.  The figure of merit is
``D = 1/2 + Delta/4`` with ``Delta`` the l1 distance of the two outcome
distributions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .symcore import _check_odd, x_basis_weights

__all__ = [
    "MeasurementSpec",
    "OutcomeDistribution",
    "FitDiagnostics",
    "sharp_probabilities",
    "pair_coarsened_probabilities",
    "pair_coarsened_delta",
    "povm_weights",
    "povm_probabilities",
    "noisy_probabilities",
    "outcome_distribution",
    "distinguishability",
    "extrapolate_limit",
]


@dataclass(frozen=True)
class MeasurementSpec:
    """``kind`` is one of ``"sharp"``, ``"pair"``, ``"povm"`` (uses ``sigma``) or ``"noise"`` (uses ``u``)."""

    kind: str
    sigma: float | None = None
    u: float | None = None

    def __post_init__(self):
        if self.kind not in ("sharp", "pair", "povm", "noise"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        if self.kind == "povm" and self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.kind == "noise" and (self.u is None or not 0.5 <= self.u <= 1):
            raise ValueError("u must lie in [1/2, 1]")


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    probs_plus: np.ndarray
    probs_minus: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs_plus, dtype=float)
        m = np.asarray(self.probs_minus, dtype=float)
        if p.shape != m.shape:
            raise ValueError("distributions must have the same number of outcomes")
        object.__setattr__(self, "probs_plus", p)
        object.__setattr__(self, "probs_minus", m)

    @property
    def delta(self) -> float:
        return math.fsum(np.abs(self.probs_plus - self.probs_minus))

    def is_valid(self, tol: float = 1e-10) -> bool:
        return all(
            abs(p.sum() - 1) <= tol and p.min() >= -1e-12 for p in (self.probs_plus, self.probs_minus)
        )


def _sharp_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    w = x_basis_weights(n)
    plus = np.array([float(2 * wk) if k % 2 == 0 else 0.0 for k, wk in enumerate(w)])
    minus = np.array([float(2 * wk) if k % 2 == 1 else 0.0 for k, wk in enumerate(w)])
    return plus, minus


def sharp_probabilities(n_qubits: int) -> OutcomeDistribution:
    """Ideal collective-x statistics: ``[1 +- (-1)^k]^2 / 2 * C(n,k) beta_k^2``.

    The weights are evaluated in exact rational arithmetic and rounded once.
    """
    return OutcomeDistribution(*_sharp_arrays(_check_odd(n_qubits)))


def _pairs(n: int, descending: bool) -> list[tuple[int, int]]:
    # Outcomes numbered 1..n+1 are merged as (1,2), (3,4), ...; with n odd the
    # count n+1 is even, so every outcome has a partner.
    order = list(range(n + 1))
    if descending:
        order = order[::-1]
    return [(order[i], order[i + 1]) for i in range(0, n + 1, 2)]


def pair_coarsened_probabilities(n_qubits: int, descending: bool = False) -> OutcomeDistribution:
    n = _check_odd(n_qubits)
    plus, minus = _sharp_arrays(n)
    pairs = _pairs(n, descending)
    return OutcomeDistribution(
        np.array([plus[a] + plus[b] for a, b in pairs]),
        np.array([minus[a] + minus[b] for a, b in pairs]),
    )


def pair_coarsened_delta(n_qubits: int, descending: bool = False) -> float:
    """``Delta`` when neighbouring collective-x outcomes cannot be told apart."""
    return pair_coarsened_probabilities(n_qubits, descending).delta


def povm_weights(n_qubits: int, sigma: float) -> np.ndarray:
    """``W[i, j] = exp(-(i-j)^2 / (2 sigma^2)) / n_j`` so that ``E_i^2 = sum_j W[i, j] pi_j``.

    The column normalisation ``n_j = sum_k exp(-(k-j)^2 / (2 sigma^2))`` makes
    ``sum_i E_i^2`` the identity.  ``sigma = 0`` gives the sharp measurement.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    n = int(n_qubits)
    if sigma == 0:
        return np.eye(n + 1)
    i = np.arange(n + 1)
    g = np.exp(-((i[:, None] - i[None, :]) ** 2) / (2 * sigma**2))
    return g / g.sum(axis=0, keepdims=True)


def povm_probabilities(n_qubits: int, sigma: float | None = None) -> OutcomeDistribution:
    """``<E_i^2>`` for Gaussian-blurred collective-x outcomes; default ``sigma = sqrt(n)``."""
    n = _check_odd(n_qubits)
    sigma = math.sqrt(n) if sigma is None else float(sigma)
    w = povm_weights(n, sigma)
    plus, minus = _sharp_arrays(n)
    return OutcomeDistribution(w @ plus, w @ minus)


def _flip_transition(n: int, u: float) -> np.ndarray:
    """``T[i, k]``: probability that outcome ``k`` is read as ``i`` after independent flips.

    A flip hits each qubit with probability ``1 - u``.  With ``A`` flips among
    the ``k`` excited qubits and ``B`` among the rest the reading is
    ``k - A + B``; ``A`` and ``B`` are independent binomials, so each column
    is a convolution of two binomial pmfs.
    """
    q = 1.0 - u
    out = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        lose = binom.pmf(np.arange(k + 1), k, q)[::-1]  # index k - A
        gain = binom.pmf(np.arange(n - k + 1), n - k, q)
        out[:, k] = np.convolve(lose, gain)
    return out


def noisy_probabilities(n_qubits: int, u: float) -> OutcomeDistribution:
    """Sharp collective-x statistics after independent phase flips with keep probability ``u``."""
    n = _check_odd(n_qubits)
    if not 0.5 <= u <= 1:
        raise ValueError("u must lie in [1/2, 1]")
    t = _flip_transition(n, u)
    plus, minus = _sharp_arrays(n)
    return OutcomeDistribution(t @ plus, t @ minus)


def outcome_distribution(n_qubits: int, spec: MeasurementSpec) -> OutcomeDistribution:
    if spec.kind == "sharp":
        return sharp_probabilities(n_qubits)
    if spec.kind == "pair":
        return pair_coarsened_probabilities(n_qubits)
    if spec.kind == "povm":
        return povm_probabilities(n_qubits, spec.sigma)
    return noisy_probabilities(n_qubits, spec.u)


def distinguishability(dist: OutcomeDistribution) -> float:
    """``1/2 + Delta/4``, clipped to ``[1/2, 1]`` against rounding."""
    return float(min(1.0, max(0.5, 0.5 + 0.25 * dist.delta)))


@dataclass(frozen=True)
class FitDiagnostics:
    coefficients: tuple[float, float, float]
    residuals: np.ndarray = field(repr=False)
    max_residual: float
    condition_number: float
    ill_conditioned: bool


def extrapolate_limit(n_values, values, cond_limit: float = 1e8) -> tuple[float, FitDiagnostics]:
    """Least-squares fit ``D(n) = D_inf + a/n + b/n^2``; returns ``D_inf`` and diagnostics."""
    n = np.asarray(n_values, dtype=float)
    y = np.asarray(values, dtype=float)
    if n.size < 5:
        raise ValueError("at least five grid points are needed")
    design = np.stack([np.ones_like(n), 1 / n, 1 / n**2], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    cond = float(np.linalg.cond(design))
    bad = cond > cond_limit
    if bad:
        warnings.warn(f"extrapolation design matrix is ill-conditioned (cond={cond:.3g})", RuntimeWarning)
    diag = FitDiagnostics(tuple(float(c) for c in coef), resid, float(np.abs(resid).max()), cond, bad)
    return float(coef[0]), diag
