import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clonemacro import metrology, oracle
from clonemacro.crosscheck import _oracle_counting
from clonemacro.errors import CapacityError
from clonemacro.metrology import EstimationScenario, NoiseKind
from clonemacro.symcore import DickeBasisLabel, dicke_state, expectation_and_variance

noise_kinds = st.sampled_from([NoiseKind.BITFLIP, NoiseKind.WHITE])
small_odd = st.sampled_from([1, 3, 5, 7])


def _scenario(n, gamma=0.5, noise=NoiseKind.BITFLIP, **kw):
    return EstimationScenario(n, kw.pop("omega", 1.0), gamma, noise, **kw)


# -- scenario validation ----------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_qubits": 4},
        {"n_qubits": 3, "gamma": 0.0},
        {"n_qubits": 3, "total_time": -1.0},
        {"n_qubits": 3, "measurement": "homodyne"},
        {"n_qubits": 3, "alpha": 2.0},
    ],
)
def test_scenario_validation(kwargs):
    with pytest.raises(ValueError):
        EstimationScenario(**kwargs)


def test_noise_parameters():
    assert metrology.noise_parameter("bitflip", 0.5, 2.0) == pytest.approx(0.5 * (1 + math.exp(-1)))
    assert metrology.noise_parameter("white", 0.5, 2.0) == pytest.approx(math.exp(-1))
    for kind in NoiseKind:
        assert metrology.flip_probability(kind, 0.5, 2.0) == pytest.approx(0.5 * (1 + math.exp(-1)))


# -- states ----------------------------------------------------------------------


@given(small_odd, noise_kinds, st.floats(0.0, 5.0))
@settings(max_examples=30, deadline=None)
def test_evolved_state_is_density_matrix(n, noise, t):
    rho = metrology.evolved_state(_scenario(n, noise=noise), t)
    assert oracle.FullDensityMatrix(n, rho).is_valid(1e-10)


@pytest.mark.parametrize("noise,kind", [(NoiseKind.BITFLIP, "bitflip_x"), (NoiseKind.WHITE, "white")])
def test_evolved_state_matches_channel_oracle(noise, kind):
    n, gamma, t = 5, 0.4, 0.9
    decay = math.exp(-gamma * t)
    p = 0.5 * (1 + decay) if noise is NoiseKind.BITFLIP else decay
    rho = oracle.embed_dicke(DickeBasisLabel(n, (n - 1) // 2)).density()
    rho = oracle.apply_local_channel(rho, kind, p)
    u = oracle.collective_rotation(n, "x", 1.0 * t)
    ref = u @ rho.matrix @ u.conj().T
    np.testing.assert_allclose(metrology.evolved_state(_scenario(n, gamma, noise), t), ref, atol=1e-12)


def test_evolved_state_capacity():
    with pytest.raises(CapacityError):
        metrology.evolved_state(_scenario(11), 0.1)


def test_eigenprojectors_time_independent_only_for_white_noise():
    # white noise keeps rho(t) in one commuting family; bit flips do not
    n = 5
    white = _scenario(n, noise=NoiseKind.WHITE)
    flip = _scenario(n, noise=NoiseKind.BITFLIP)

    def comm(sc):
        a = metrology.evolved_state(sc, 0.3, rotate=False)
        b = metrology.evolved_state(sc, 0.6, rotate=False)
        return float(np.abs(a @ b - b @ a).max())

    assert comm(white) < 1e-14
    assert comm(flip) > 1e-4


# -- quantum Fisher information ---------------------------------------------------


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_qfi_noiseless_limit_is_variance(n):
    t = 0.8
    sc = _scenario(n, gamma=1e-13)
    _, var = expectation_and_variance(dicke_state(n, (n - 1) // 2), "x")
    assert metrology.quantum_fisher_information(sc, t) == pytest.approx(t * t * var, rel=1e-9)


def test_qfi_vanishes_for_long_times():
    for noise in NoiseKind:
        assert metrology.quantum_fisher_information(_scenario(5, noise=noise), 80.0) < 1e-10


def test_spectral_qfi_mixed_state_zero():
    assert metrology.spectral_qfi(np.eye(4) / 4, np.diag([1.0, -1.0, 2.0, 0.0])) == 0.0


@given(small_odd, noise_kinds, st.floats(0.05, 2.0), st.floats(0.01, 4.0))
@settings(max_examples=25, deadline=None)
def test_qfi_matches_sld_solver(n, noise, gamma, t):
    sc = _scenario(n, gamma, noise)
    rho = metrology.evolved_state(sc, t, rotate=False)
    ref = oracle.sld_quantum_fisher(rho, 0.5 * t * oracle.collective_operator(n, "x"))
    assert metrology.quantum_fisher_information(sc, t) == pytest.approx(ref, rel=1e-8, abs=1e-14)


# -- counting read-outs ----------------------------------------------------------


@given(
    st.sampled_from([1, 3, 5, 9, 15]),
    noise_kinds,
    st.floats(0.05, 2.0),
    st.floats(0.0, 5.0),
    st.floats(0.0, math.pi / 2),
)
@settings(max_examples=40, deadline=None)
def test_counting_probabilities_normalised(n, noise, gamma, t, alpha):
    s = metrology.measurement_probabilities(_scenario(n, gamma, noise), t, alpha)
    assert s.sum() == pytest.approx(1.0, abs=1e-12)
    assert s.min() >= -1e-14


def test_counting_deterministic_without_noise_or_rotation():
    n = 7
    s, _ = metrology._local_probs(n, [0.0], 1.0)
    np.testing.assert_allclose(s[0], np.eye(n + 1)[(n - 1) // 2], atol=1e-14)


@pytest.mark.parametrize("noise", list(NoiseKind))
def test_counting_matches_oracle(noise):
    n, omega, gamma, t, alpha = 5, 1.3, 0.7, 0.9, 0.35
    sc = _scenario(n, gamma, noise, omega=omega)
    ref = _oracle_counting(n, omega, gamma, t, alpha, noise)
    np.testing.assert_allclose(metrology.measurement_probabilities(sc, t, alpha), ref, atol=1e-12)


def test_analytic_slopes_against_finite_differences():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.choice([1, 3, 5, 7, 9, 11]))
        sc = _scenario(
            n,
            float(rng.uniform(0.05, 2.0)),
            NoiseKind.BITFLIP if rng.random() < 0.5 else NoiseKind.WHITE,
            omega=float(rng.uniform(0.1, 3.0)),
        )
        t, alpha = float(rng.uniform(0.01, 4.0)), float(rng.uniform(0, math.pi / 2))
        _, ds = metrology.measurement_probabilities_and_derivative(sc, t, alpha)
        h = 1e-6
        up = metrology.measurement_probabilities(EstimationScenario(**{**sc.__dict__, "omega": sc.omega + h}), t, alpha)
        down = metrology.measurement_probabilities(EstimationScenario(**{**sc.__dict__, "omega": sc.omega - h}), t, alpha)
        np.testing.assert_allclose(ds, (up - down) / (2 * h), atol=1e-7)
        metrology.classical_fisher_information(sc, t, alpha, check=True)


@given(small_odd, noise_kinds, st.floats(0.05, 2.0), st.floats(0.01, 5.0), st.floats(0.0, math.pi / 2))
@settings(max_examples=40, deadline=None)
def test_classical_below_quantum(n, noise, gamma, t, alpha):
    sc = _scenario(n, gamma, noise)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fc = metrology.classical_fisher_information(sc, t, alpha, check=False)
    assert fc <= metrology.quantum_fisher_information(sc, t) + 1e-8


@given(small_odd, noise_kinds, st.floats(0.05, 2.0), st.floats(0.01, 4.0), st.floats(0.0, math.pi / 2))
@settings(max_examples=25, deadline=None)
def test_classical_fisher_density_route(n, noise, gamma, t, alpha):
    sc = _scenario(n, gamma, noise)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        a = metrology.classical_fisher_information(sc, t, alpha, check=False)
        b = metrology.classical_fisher_density(sc, t, alpha)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


# -- Cramer-Rao optimisation -------------------------------------------------------


@pytest.mark.parametrize("gamma", [0.2, 0.5, 1.5])
def test_cramer_rao_heisenberg_like_curve(gamma):
    # F = n^2 t^2 exp(-2 gamma t) minimises t/F at t = 1/(2 gamma)
    n = 9
    res = metrology.cramer_rao_uncertainty(lambda t: n * n * t * t * math.exp(-2 * gamma * t), gamma, n)
    assert res.optimal_t == pytest.approx(1 / (2 * gamma), rel=1e-6)
    assert res.delta_omega == pytest.approx(math.sqrt(2 * math.e * gamma) / n, rel=1e-10)
    assert res.relative_improvement == pytest.approx(1 - 1 / math.sqrt(n), rel=1e-9)
    assert res.unimodal


def test_cramer_rao_product_curve_has_no_gain():
    n, gamma = 5, 0.5
    res = metrology.cramer_rao_uncertainty(lambda t: n * t * t * math.exp(-2 * gamma * t), gamma, n)
    assert res.relative_improvement == pytest.approx(0.0, abs=1e-10)
    assert res.baseline == pytest.approx(metrology.product_state_uncertainty(n, gamma))


def test_cramer_rao_flags_two_minima():
    # delta omega^2 = h(t) with minima at t = 1 and t = e^2
    def fisher(t):
        x = math.log(t)
        return t / (x * x * (x - 2) ** 2 + 0.1)

    res = metrology.cramer_rao_uncertainty(fisher, 0.5, 3)
    assert not res.unimodal


def test_cramer_rao_total_time_scaling():
    f = lambda t: 9 * t * t * math.exp(-t)  # noqa: E731
    a = metrology.cramer_rao_uncertainty(f, 0.5, 3, total_time=1.0)
    b = metrology.cramer_rao_uncertainty(f, 0.5, 3, total_time=4.0)
    assert b.delta_omega == pytest.approx(a.delta_omega / 2, rel=1e-12)
    assert b.relative_improvement == pytest.approx(a.relative_improvement, abs=1e-12)


# -- angle optimisation -------------------------------------------------------------


def test_angle_optimum_beats_grid():
    sc = _scenario(5)
    res = metrology.optimize_measurement_angle(sc, 0.3)
    grid = np.linspace(0, math.pi / 2, 200)
    vals = [metrology.classical_fisher_information(sc, 0.3, a, check=False) for a in grid]
    assert res.fisher >= max(vals) - 1e-12
    assert res.fisher == pytest.approx(metrology.classical_fisher_information(sc, 0.3, res.alpha), rel=1e-12)
    assert not res.flat


def test_angle_optimum_stable_under_grid_refinement():
    sc = _scenario(5)
    alphas = [metrology.optimize_measurement_angle(sc, 0.3, step=s).alpha for s in (1e-2, 1e-3)]
    assert alphas[0] == pytest.approx(alphas[1], abs=1e-6)


def test_angle_flat_landscape():
    sc = _scenario(3, gamma=60.0)
    res = metrology.optimize_measurement_angle(sc, 5.0)
    assert res.flat and res.alpha == 0.0


def test_local_improvement_independent_of_gamma():
    # F_local(t) = t^2 g(gamma t), so the optimised relative gain cannot depend on gamma
    a = metrology.optimize_scenario(_scenario(3, 0.5, measurement="local"))
    b = metrology.optimize_scenario(_scenario(3, 0.2, measurement="local"))
    assert a.relative_improvement == pytest.approx(b.relative_improvement, abs=1e-8)
    assert a.optimal_t * 0.5 == pytest.approx(b.optimal_t * 0.2, rel=1e-5)


def test_improvement_curve_rows():
    rows = metrology.relative_improvement_curve(NoiseKind.BITFLIP, 1.0, 0.5, ("global", "z"), (3, 5))
    assert [(r["n"], r["measurement"]) for r in rows] == [(3, "global"), (3, "z"), (5, "global"), (5, "z")]
    for r in rows:
        assert r["relative_improvement"] < metrology.IMPROVEMENT_CAP
        assert r["delta_omega"] == pytest.approx(r["baseline"] * (1 - r["relative_improvement"]), rel=1e-12)
    assert rows[0]["relative_improvement"] > 0 > rows[1]["relative_improvement"]


def test_rotated_measurement_uses_fixed_angle():
    sc = _scenario(3, measurement="rotated", alpha=0.4)
    res = metrology.optimize_scenario(sc)
    assert res.alpha == 0.4
    assert res.fisher == pytest.approx(metrology.classical_fisher_information(sc, res.optimal_t, 0.4), rel=1e-12)
