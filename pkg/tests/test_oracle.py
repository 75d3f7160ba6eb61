import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clonemacro import oracle
from clonemacro.errors import CapacityError
from clonemacro.symcore import DickeBasisLabel, cloner_state


def _permute_qubits(vec, n, perm):
    return vec.reshape((2,) * n).transpose(perm).reshape(-1)


@pytest.mark.parametrize("kind,param", [("phase_z", 0.3), ("bitflip_x", 0.8), ("white", 0.4)])
def test_kraus_complete(kind, param):
    ks = oracle.channel_kraus(kind, param)
    np.testing.assert_allclose(sum(k.conj().T @ k for k in ks), np.eye(2), atol=1e-15)


def test_white_channel_shrinks_bloch_vector():
    rho = np.array([[1, 0], [0, 0]], dtype=complex)
    out = oracle.apply_local_channel(oracle.FullDensityMatrix(1, rho), "white", 0.3).matrix
    np.testing.assert_allclose(out, 0.3 * rho + 0.7 * np.eye(2) / 2, atol=1e-15)


def test_phase_flip_dephases():
    plus = oracle.FullStateVector(1, np.array([1, 1]) / math.sqrt(2)).density()
    out = oracle.apply_local_channel(plus, "phase_z", 0.75).matrix
    np.testing.assert_allclose(out, [[0.5, 0.25], [0.25, 0.5]], atol=1e-15)


def test_bad_channel_parameters():
    with pytest.raises(ValueError):
        oracle.channel_kraus("white", 1.5)
    with pytest.raises(ValueError):
        oracle.channel_kraus("amplitude", 0.5)


def test_capacity_limits():
    with pytest.raises(CapacityError):
        oracle.embed_dicke(DickeBasisLabel(13, 2))
    with pytest.raises(CapacityError):
        oracle.FullDensityMatrix(11, np.zeros((2, 2)))


def test_channel_output_is_state():
    rng = np.random.default_rng(1)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    rho = oracle.FullStateVector(3, v / np.linalg.norm(v)).density()
    for kind in ("phase_z", "bitflip_x", "white"):
        assert oracle.apply_local_channel(rho, kind, 0.6).is_valid()


@pytest.mark.parametrize("n", [3, 5])
def test_dicke_states_permutation_invariant(n):
    for k in range(n + 1):
        for axis in ("z", "x"):
            vec = oracle.embed_dicke(DickeBasisLabel(n, k, axis)).amplitudes
            for perm in itertools.islice(itertools.permutations(range(n)), 1, 8):
                np.testing.assert_allclose(_permute_qubits(vec, n, perm), vec, atol=1e-14)


def test_partial_trace_of_product_state():
    a = np.array([1, 0], dtype=complex)
    b = np.array([1, 1j]) / math.sqrt(2)
    state = oracle.FullStateVector(2, np.kron(a, b))
    np.testing.assert_allclose(oracle.partial_trace(state, [1]).matrix, np.outer(b, b.conj()), atol=1e-15)
    np.testing.assert_allclose(oracle.partial_trace(state, [0]).matrix, np.outer(a, a.conj()), atol=1e-15)


def test_partial_trace_keeps_order():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    state = oracle.FullStateVector(4, v / np.linalg.norm(v))
    r13 = oracle.partial_trace(state, [1, 3]).matrix
    swapped = oracle.FullStateVector(4, _permute_qubits(state.amplitudes, 4, (0, 3, 2, 1)))
    r13_swapped = oracle.partial_trace(swapped, [1, 3]).matrix
    swap = np.eye(4)[[0, 2, 1, 3]]
    np.testing.assert_allclose(swap @ r13 @ swap, r13_swapped, atol=1e-14)


def test_collective_rotation_matches_expm():
    import scipy.linalg

    n = 3
    u = oracle.collective_rotation(n, "x", 0.7)
    ref = scipy.linalg.expm(-0.35j * oracle.collective_operator(n, "x"))
    np.testing.assert_allclose(u, ref, atol=1e-13)


def test_weight_projectors_partition_identity():
    p = oracle.weight_projector_diagonals(4)
    np.testing.assert_array_equal(p.sum(0), np.ones(16))
    np.testing.assert_array_equal(p.sum(1), [1, 4, 6, 4, 1])


@given(st.sampled_from([1, 3, 5]), st.floats(0.0, 2.0), st.integers(0, 10))
@settings(max_examples=30, deadline=None)
def test_sld_pure_state_is_four_variances(n, scale, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    state = oracle.FullStateVector(n, v / np.linalg.norm(v))
    gen = scale * oracle.collective_operator(n, "x")
    var = oracle.expectation(state, gen @ gen).real - oracle.expectation(state, gen).real ** 2
    assert oracle.sld_quantum_fisher(state.density(), gen) == pytest.approx(4 * var, rel=1e-8, abs=1e-9)


def test_sld_maximally_mixed_is_zero():
    n = 3
    rho = oracle.FullDensityMatrix(n, np.eye(8) / 8)
    assert oracle.sld_quantum_fisher(rho, oracle.collective_operator(n, "x")) == pytest.approx(0, abs=1e-14)


def test_cloner_embedding_norm():
    for sign in (1, -1):
        vec = oracle.embed_symmetric(cloner_state(7, sign)).amplitudes
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-14)
