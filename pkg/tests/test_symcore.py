import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clonemacro import oracle
from clonemacro.errors import UnsupportedInputError
from clonemacro.symcore import (
    Axis,
    CollectiveObservable,
    DickeBasisLabel,
    bipartite_split,
    cloner_state,
    collective_matrix,
    dicke_basis_change,
    dicke_state,
    expectation_and_variance,
    log_binomial,
    micro_macro_state,
    reduced_operator,
    reduced_state,
    split_coefficients,
    x_basis_coefficients,
    x_basis_weights,
)

odd_n = st.integers(0, 50).map(lambda m: 2 * m + 1)


def _stirling_log_factorial(n):
    # Independent asymptotic series for ln n!
    return n * math.log(n) - n + 0.5 * math.log(2 * math.pi * n) + 1 / (12 * n) - 1 / (360 * n**3) + 1 / (1260 * n**5)


# -- log_binomial -----------------------------------------------------------------


def test_log_binomial_small():
    assert log_binomial(4, 2) == pytest.approx(math.log(6), abs=1e-15)
    assert log_binomial(17, 0) == 0.0
    assert log_binomial(17, 17) == 0.0


def test_log_binomial_large_matches_stirling():
    ref = _stirling_log_factorial(10000) - 2 * _stirling_log_factorial(5000)
    assert log_binomial(10000, 5000) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("n,k", [(3, 4), (3, -1), (-1, 0)])
def test_log_binomial_domain(n, k):
    with pytest.raises(ValueError):
        log_binomial(n, k)


@given(st.integers(0, 64).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_log_binomial_exact_path(nk):
    n, k = nk
    assert log_binomial(n, k) == pytest.approx(math.log(math.comb(n, k)), rel=1e-12, abs=1e-15)


def test_log_binomial_continuous_across_exact_limit():
    for k in (0, 10, 32):
        lg = math.lgamma(66) - math.lgamma(k + 1) - math.lgamma(66 - k)
        assert log_binomial(65, k) == pytest.approx(lg, rel=1e-12, abs=1e-13)


# -- states -------------------------------------------------------------------------


def test_cloner_n1_is_plus():
    s = cloner_state(1, +1)
    np.testing.assert_allclose(s.amplitudes, [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)


def test_cloner_n3_minus():
    s = cloner_state(3, -1)
    np.testing.assert_allclose(s.amplitudes, [0, 1 / math.sqrt(2), -1 / math.sqrt(2), 0], atol=1e-15)


def test_cloner_moments_match_oracle_n5():
    sx = oracle.collective_operator(5, "x")
    for sign in (1, -1):
        full = oracle.embed_symmetric(cloner_state(5, sign))
        ref_mean = oracle.expectation(full, sx).real
        ref_var = oracle.expectation(full, sx @ sx).real - ref_mean**2
        mean, var = expectation_and_variance(cloner_state(5, sign), CollectiveObservable(Axis.X))
        assert mean == pytest.approx(ref_mean, abs=1e-12)
        assert var == pytest.approx(ref_var, abs=1e-12)
        assert mean == pytest.approx(3.0 * sign, abs=1e-12)


@pytest.mark.parametrize("n", [2, 4, 0, -3])
def test_even_n_rejected(n):
    with pytest.raises(UnsupportedInputError):
        cloner_state(n, +1)
    with pytest.raises(UnsupportedInputError):
        micro_macro_state(n)
    with pytest.raises(UnsupportedInputError):
        x_basis_coefficients(n)


def test_unnormalised_state_rejected():
    from clonemacro.symcore import SymmetricPureState

    with pytest.raises(ValueError):
        SymmetricPureState(2, Axis.Z, [1.0, 1.0, 0.0])


def test_dicke_label_range():
    with pytest.raises(ValueError):
        DickeBasisLabel(3, 4)


@given(odd_n)
@settings(max_examples=60, deadline=None)
def test_mx_mean_and_variance_all_odd_n(n):
    for sign in (1, -1):
        mean, var = expectation_and_variance(cloner_state(n, sign), CollectiveObservable(Axis.X))
        # <a| sum sigma^+ |b> = (n+1)/2 for the two central Dicke states
        assert mean == pytest.approx(sign * (n + 1) / 2, rel=1e-12)
        assert var == pytest.approx((n - 1) * (n + 3) / 4, rel=1e-12, abs=1e-12)


def test_central_dicke_mz_eigenvalues():
    # M_z |n, (n-+1)/2> = +-|n, (n-+1)/2>
    for n in (3, 7, 21):
        a, b = (n - 1) // 2, (n + 1) // 2
        assert expectation_and_variance(dicke_state(n, a), Axis.Z) == pytest.approx((1.0, 0.0), abs=1e-12)
        assert expectation_and_variance(dicke_state(n, b), Axis.Z) == pytest.approx((-1.0, 0.0), abs=1e-12)


def test_micro_macro_n1_marginals_maximally_mixed():
    full = oracle.embed_micro_macro(micro_macro_state(1))
    for q in (0, 1):
        np.testing.assert_allclose(oracle.partial_trace(full, [q]).matrix, np.eye(2) / 2, atol=1e-14)


def test_micro_macro_norm():
    assert np.linalg.norm(micro_macro_state(3).vector()) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_sigma_z_mz_maps_branches(n):
    state = micro_macro_state(n)
    phi0, phi1 = state.components()
    sz = np.diag([1.0, -1.0])
    op = np.kron(sz, collective_matrix(n, Axis.Z))
    # phi0 = (1/sqrt2)|+>psi^-, phi1 = -(1/sqrt2)|->psi^+.
    np.testing.assert_allclose(op @ phi0, -phi1, atol=1e-14)


def test_collective_matrices_match_oracle():
    n = 4
    iso = oracle.symmetric_isometry(n)
    for axis in "xyz":
        full = oracle.collective_operator(n, axis)
        np.testing.assert_allclose(iso.conj().T @ full @ iso, collective_matrix(n, axis), atol=1e-12)


# -- x basis ------------------------------------------------------------------------


def test_basis_change_is_real_symmetric_involution():
    for n in (1, 4, 9, 30):
        b = dicke_basis_change(n)
        np.testing.assert_allclose(b, b.T, atol=1e-14)
        np.testing.assert_allclose(b @ b, np.eye(n + 1), atol=1e-12)


def test_basis_change_matches_hadamard_oracle():
    n = 6
    iso = oracle.symmetric_isometry(n)
    for l in range(n + 1):
        xs = oracle.embed_dicke(DickeBasisLabel(n, l, Axis.X)).amplitudes
        np.testing.assert_allclose(iso.conj().T @ xs, dicke_basis_change(n)[:, l], atol=1e-12)


def test_plus_state_has_even_x_support():
    beta = x_basis_coefficients(1)
    weights = np.array([(1 + (-1) ** k) ** 2 / 2 * math.comb(1, k) * beta[k] ** 2 for k in range(2)])
    np.testing.assert_allclose(weights, [1.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("n", [5, 11, 31])
def test_x_expansion_normalised(n):
    beta = x_basis_coefficients(n)
    for sign in (1, -1):
        total = sum((1 + sign * (-1) ** k) ** 2 / 2 * math.comb(n, k) * beta[k] ** 2 for k in range(n + 1))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_x_coefficients_match_oracle_n7():
    n = 7
    beta = x_basis_coefficients(n)
    for sign in (1, -1):
        full = oracle.embed_symmetric(cloner_state(n, sign)).amplitudes
        in_x = oracle.hadamard_all(full)
        w = oracle.popcounts(n)
        for k in range(n + 1):
            dicke_amp = (1 + sign * (-1) ** k) / math.sqrt(2) * math.sqrt(math.comb(n, k)) * beta[k]
            # each of the C(n,k) product states carries dicke_amp / sqrt(C(n,k))
            np.testing.assert_allclose(in_x[w == k] * math.sqrt(math.comb(n, k)), dicke_amp, atol=1e-12)


@given(odd_n)
@settings(max_examples=40, deadline=None)
def test_parity_support(n):
    state = cloner_state(n, +1).in_axis(Axis.X).amplitudes
    np.testing.assert_allclose(state[1::2], 0, atol=1e-10)
    state = cloner_state(n, -1).in_axis(Axis.X).amplitudes
    np.testing.assert_allclose(state[0::2], 0, atol=1e-10)


def test_x_weights_exact_and_sum():
    w = x_basis_weights(9)
    assert all(isinstance(v, Fraction) for v in w)
    assert 2 * sum(w[0::2]) == 1 and 2 * sum(w[1::2]) == 1


# -- bipartite split and reduced states ---------------------------------------------


def test_split_empty_and_full_subgroup():
    s = cloner_state(7, +1)
    for x, c in bipartite_split(s, 0).items():
        np.testing.assert_allclose(c, [1.0])
    for x, c in bipartite_split(s, 7).items():
        np.testing.assert_allclose(c, np.eye(8)[x])


@given(
    st.integers(1, 200).flatmap(
        lambda n: st.tuples(st.just(n), st.integers(0, n), st.integers(0, n))
    )
)
@settings(max_examples=200, deadline=None)
def test_split_vandermonde(nkx):
    n, k, x = nkx
    assert split_coefficients(n, k, x).sum() == pytest.approx(1.0, abs=1e-12)


def test_split_exact_and_log_paths_agree():
    for k, x in [(3, 10), (20, 31), (31, 32)]:
        np.testing.assert_allclose(
            split_coefficients(63, k, x, exact=True), split_coefficients(63, k, x, exact=False), rtol=1e-10, atol=1e-15
        )


@pytest.mark.parametrize("n", [1, 3, 7, 11])
def test_reduced_state_full_subgroup_is_pure(n):
    for sign in (1, -1):
        amps = cloner_state(n, sign).amplitudes
        np.testing.assert_allclose(reduced_state(n, sign, n).matrix, np.outer(amps, amps.conj()), atol=1e-14)


@pytest.mark.parametrize("n,k", [(7, 2), (5, 1), (5, 3), (7, 7), (3, 2)])
def test_reduced_state_matches_oracle(n, k):
    iso = oracle.symmetric_isometry(k)
    for sign in (1, -1):
        full = oracle.partial_trace(oracle.embed_symmetric(cloner_state(n, sign)), range(k))
        np.testing.assert_allclose(iso.conj().T @ full.matrix @ iso, reduced_state(n, sign, k).matrix, atol=1e-12)


def test_reduced_state_general_partial_trace_agrees():
    n = 9
    for sign in (1, -1):
        s = cloner_state(n, sign)
        for k in (1, 4, 9):
            np.testing.assert_allclose(reduced_operator(s, s, k), reduced_state(n, sign, k).matrix, atol=1e-14)


def test_reduced_state_large_n_single_qubit():
    for sign in (1, -1):
        rho = reduced_state(10001, sign, 1).matrix
        np.testing.assert_allclose(np.diag(rho).real, [0.5, 0.5], atol=1e-4)
        assert rho[0, 1].real == pytest.approx(sign * 0.25, abs=1e-4)
        rho_a = reduced_state(10001, sign, 1, mode="asymptotic").matrix
        np.testing.assert_allclose(rho_a, [[0.5, sign * 0.25], [sign * 0.25, 0.5]], atol=1e-15)


@given(odd_n, st.data())
@settings(max_examples=40, deadline=None)
def test_reduced_states_valid(n, data):
    k = data.draw(st.integers(1, n))
    for sign in (1, -1):
        assert reduced_state(n, sign, k).is_valid()
