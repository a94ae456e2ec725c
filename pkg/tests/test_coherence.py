import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asymcoh import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    BasisParameterization,
    DensityMatrix,
    OrthonormalBasis,
    bloch_basis,
    bloch_grid_bases,
    commutator,
    haar_random_unitary,
    local_terms,
    normalized_oracle,
    normalized_tc_w_coherence,
    objective,
    oracle_basis,
    permutation_covariance_check,
    product_basis_coherence,
    product_grid_maximum,
    qubit_closed_form,
    random_density_matrix,
    random_generator,
    spectral_oracle,
    tc_w_coherence,
    tc_w_coherence_many,
)
from asymcoh.coherence import params_to_unitary
from asymcoh.errors import DegenerateGeneratorWarning, InvalidPermutation, NotLocalGenerator, ZeroGenerator

from conftest import PLUS, bloch_grid_max, instances, seeds


# --- objective ----------------------------------------------------------------------------


def test_objective_incoherent_state_any_basis():
    K = random_generator(3, seed=1)
    v = K.eigenvectors.vectors
    rho = (v * [0.5, 0.3, 0.2]) @ v.conj().T
    assert objective(rho, K, haar_random_unitary(3, 2)) <= 1e-14


def test_objective_plus_state_examples(plus_state, y_basis):
    assert objective(plus_state, SIGMA_Z, bloch_basis(np.pi / 2, np.pi / 2)) == pytest.approx(1)
    assert objective(plus_state, SIGMA_Z, y_basis) == pytest.approx(1)
    assert objective(plus_state, SIGMA_Z, OrthonormalBasis.computational(2)) == 0


@given(instances(), seeds)
def test_objective_is_half_commutator_diagonal(inst, seed):
    rho, K = inst
    u = haar_random_unitary(rho.dim, seed)
    c = commutator(K, rho)
    direct = 0.5 * np.sum(np.abs(np.einsum("ix,ij,jx->x", u.conj(), c, u)))
    assert objective(rho, K, u) == pytest.approx(direct, abs=1e-12)


# --- spectral oracle ---------------------------------------------------------------------------


def test_oracle_examples(plus_state):
    assert spectral_oracle(np.diag([0.3, 0.7]), SIGMA_Z) == 0
    assert spectral_oracle(plus_state, SIGMA_Z) == pytest.approx(1)


@given(instances(2, 2))
def test_oracle_matches_qubit_closed_form(inst):
    rho, K = inst
    assert spectral_oracle(rho, K) == pytest.approx(qubit_closed_form(rho, K), abs=1e-10)


@given(instances())
def test_oracle_basis_attains_oracle(inst):
    rho, K = inst
    assert objective(rho, K, oracle_basis(rho, K)) == pytest.approx(spectral_oracle(rho, K), abs=1e-12)


@given(instances(), seeds)
def test_oracle_dominates_any_basis(inst, seed):
    rho, K = inst
    assert objective(rho, K, haar_random_unitary(rho.dim, seed)) <= spectral_oracle(rho, K) + 1e-12


@settings(max_examples=10)
@given(instances(2, 2))
def test_oracle_matches_dense_bloch_grid(inst):
    rho, K = inst
    grid = bloch_grid_max(rho, K)
    oracle = spectral_oracle(rho, K)
    assert grid <= oracle + 1e-12
    assert oracle - grid <= 1e-4


def test_oracle_against_random_search_d3():
    rho = random_density_matrix(3, seed=8)
    K = random_generator(3, seed=9)
    rng = np.random.default_rng(10)
    best = 0.0
    kr = K.matrix @ rho.matrix
    for _ in range(20):
        z = rng.standard_normal((5000, 3, 3)) + 1j * rng.standard_normal((5000, 3, 3))
        q, _ = np.linalg.qr(z)
        vals = np.abs(np.einsum("nix,ij,njx->nx", q.conj(), kr, q).imag).sum(axis=1)
        best = max(best, vals.max())
    oracle = spectral_oracle(rho, K)
    assert best <= oracle + 1e-12
    assert best >= 0.97 * oracle


@given(instances(), st.floats(-5, 5))
def test_scaling_in_generator(inst, c):
    rho, K = inst
    assert spectral_oracle(rho, c * K.matrix) == pytest.approx(abs(c) * spectral_oracle(rho, K), abs=1e-9)


@given(instances(), seeds)
def test_unitary_invariance(inst, seed):
    rho, K = inst
    u = haar_random_unitary(rho.dim, seed)
    lhs = spectral_oracle(u @ rho.matrix @ u.conj().T, u @ K.matrix @ u.conj().T)
    assert lhs == pytest.approx(spectral_oracle(rho, K), abs=1e-8)


@given(instances(), seeds, st.integers(2, 4))
def test_convexity(inst, seed, m):
    _, K = inst
    d = K.dim
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(m))
    states = [random_density_matrix(d, seed=rng).matrix for _ in range(m)]
    mix = sum(pk * s for pk, s in zip(p, states))
    assert spectral_oracle(mix, K) <= sum(pk * spectral_oracle(s, K) for pk, s in zip(p, states)) + 1e-8


@given(instances(), seeds)
def test_faithfulness(inst, seed):
    rho, K = inst
    v = K.eigenvectors.vectors
    p = np.random.default_rng(seed).dirichlet(np.ones(K.dim))
    incoherent = (v * p) @ v.conj().T
    assert spectral_oracle(incoherent, K) <= 1e-12
    # perturbing away from the commutant makes the coherence strictly positive
    mixed = 0.9 * incoherent + 0.1 * rho.matrix
    norm = np.max(np.abs(commutator(K, mixed)))
    if norm > 1e-9:
        assert spectral_oracle(mixed, K) >= 0.5 * norm - 1e-12


# --- optimizer -----------------------------------------------------------------------------


def test_parameterization_unitary_and_layout():
    par = BasisParameterization((3,))
    assert par.mode == "full" and par.n_params == 9
    u = par.unitaries(np.random.default_rng(0).normal(size=(5, 9)))
    assert np.max(np.abs(u @ np.conj(np.swapaxes(u, 1, 2)) - np.eye(3))) <= 1e-10
    # the first d parameters are the diagonal of H
    assert np.allclose(params_to_unitary(np.array([[0.3, -0.2, 0, 0, 0, 0, 0, 0, 0]]), 3)[0], np.diag(np.exp(1j * np.array([0.3, -0.2, 0]))))
    prod = BasisParameterization((2, 2))
    assert prod.mode == "product" and prod.n_params == 8
    u = prod.unitaries(np.random.default_rng(1).normal(size=(1, 8)))[0]
    # a tensor product has operator-Schmidt rank 1
    s = np.linalg.svd(u.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4), compute_uv=False)
    assert np.sum(s > 1e-10) == 1


def test_plus_state_reaches_one(plus_state):
    res = tc_w_coherence(plus_state, SIGMA_Z)
    assert res.value == pytest.approx(1, abs=1e-7)
    assert res.converged and res.restarts_run == 16
    assert objective(plus_state, SIGMA_Z, res.argmax_basis) == pytest.approx(res.value, abs=1e-12)


def test_maximally_mixed_is_zero():
    res = tc_w_coherence(np.eye(3) / 3, random_generator(3, seed=0), restarts=2)
    assert res.value == pytest.approx(0, abs=1e-12) and res.converged


def test_random_d4_matches_oracle():
    res = tc_w_coherence(random_density_matrix(4, seed=5), random_generator(4, seed=6), restarts=4)
    assert res.gap <= 1e-6 and res.converged


def test_warm_start_adds_oracle_basis():
    rho, K = random_density_matrix(3, seed=15), random_generator(3, seed=16)
    res = tc_w_coherence(rho, K, restarts=4, warm_start=True)
    assert res.restarts_run == 5
    assert abs(res.value - spectral_oracle(rho, K)) <= 1e-12


def test_result_value_dominates_every_restart():
    rho, K = random_density_matrix(3, seed=3), random_generator(3, seed=4)
    res = tc_w_coherence(rho, K, restarts=3)
    assert res.value >= max(res.restart_values) - 1e-12


def test_batched_run_equals_single_runs():
    pairs = [(random_density_matrix(2, seed=i), random_generator(2, seed=100 + i)) for i in range(3)]
    many = tc_w_coherence_many(pairs, restarts=3)
    for (rho, K), res in zip(pairs, many):
        single = tc_w_coherence(rho, K, restarts=3)
        assert single.value == res.value
        assert np.array_equal(single.argmax_basis.vectors, res.argmax_basis.vectors)


def test_seed_reproducibility():
    rho, K = random_density_matrix(3, seed=1), random_generator(3, seed=2)
    a = tc_w_coherence(rho, K, restarts=2, seed=4).to_dict()
    b = tc_w_coherence(rho, K, restarts=2, seed=4).to_dict()
    assert a == b


def test_optimizer_argument_checks():
    with pytest.raises(ValueError):
        tc_w_coherence(np.eye(2) / 2, SIGMA_Z, tol=0)


# --- qubit closed form and Bloch bases -------------------------------------------------------


def test_closed_form_examples(plus_state):
    assert qubit_closed_form(plus_state, SIGMA_Z) == pytest.approx(1)
    rho = np.array([[0.5, 0.3j], [-0.3j, 0.5]])
    assert qubit_closed_form(rho, np.diag([2.0, -1.0])) == pytest.approx(0.9)
    assert spectral_oracle(rho, np.diag([2.0, -1.0])) == pytest.approx(0.9)


def test_closed_form_degenerate_branch(plus_state):
    with pytest.warns(DegenerateGeneratorWarning):
        assert qubit_closed_form(plus_state, np.diag([3.0, 3.0])) == 0


def test_bloch_bases():
    b = bloch_basis(0, 0).vectors
    assert np.allclose(np.abs(b), np.eye(2))
    b = bloch_basis(np.pi / 2, 0).vectors
    assert np.allclose(b[:, 0], PLUS) and np.allclose(b[:, 1], [1 / np.sqrt(2), -1 / np.sqrt(2)])
    b = bloch_basis(np.pi / 2, np.pi / 2).vectors
    assert np.allclose(b[:, 0], [1 / np.sqrt(2), 1j / np.sqrt(2)])
    grid = bloch_grid_bases(5, 4)
    assert grid.shape == (20, 2, 2)


def test_bloch_maximizer_phase_rule():
    # optimum at alpha = pi/2, beta = pi/2 - phi for rho_01 = |rho_01| e^{i phi}
    phi = 0.7
    rho = np.array([[0.5, 0.4 * np.exp(1j * phi)], [0.4 * np.exp(-1j * phi), 0.5]])
    assert objective(rho, SIGMA_Z, bloch_basis(np.pi / 2, np.pi / 2 - phi)) == pytest.approx(0.8)


# --- composite systems --------------------------------------------------------------------------


def test_local_terms_reconstruct():
    k1, k2 = random_generator(2, seed=1).matrix, random_generator(3, seed=2).matrix
    K = np.kron(k1, np.eye(3)) + np.kron(np.eye(2), k2)
    t = local_terms(K, (2, 3))
    assert np.allclose(np.kron(t[0], np.eye(3)) + np.kron(np.eye(2), t[1]), K, atol=1e-12)
    with pytest.raises(NotLocalGenerator):
        local_terms(np.kron(SIGMA_X, SIGMA_X), (2, 2))


def test_product_state_product_basis_equals_local_value():
    r1, r2 = random_density_matrix(2, seed=3).matrix, random_density_matrix(2, seed=4).matrix
    k1 = random_generator(2, seed=5).matrix
    res = product_basis_coherence(np.kron(r1, r2), np.kron(k1, np.eye(2)), (2, 2), restarts=4)
    assert res.value == pytest.approx(tc_w_coherence(r1, k1, restarts=4).value, abs=2e-6)
    assert res.oracle_value is None and res.mode == "product"


def test_product_basis_incoherent_state_is_zero():
    K = np.kron(SIGMA_Z, np.eye(2)) + np.kron(np.eye(2), SIGMA_Z)
    res = product_basis_coherence(np.diag([0.1, 0.2, 0.3, 0.4]), K, (2, 2), restarts=2)
    assert res.value <= 1e-12


def test_bell_state_matches_product_grid():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = DensityMatrix.pure(phi)
    K = np.kron(SIGMA_Z, np.eye(2)) + np.kron(np.eye(2), SIGMA_Z)
    res = product_basis_coherence(rho, K, (2, 2), restarts=4)
    assert abs(res.value - product_grid_maximum(rho, K)) <= 1e-3


def test_product_value_below_full_value():
    rho = random_density_matrix(4, seed=31)
    K = np.kron(SIGMA_Y, np.eye(2)) + np.kron(np.eye(2), 0.5 * SIGMA_X)
    res = product_basis_coherence(rho, K, (2, 2), restarts=4)
    assert res.value <= spectral_oracle(rho, K) + 1e-8
    assert res.value >= product_grid_maximum(rho, K) - 1e-3


# --- normalization and permutations ----------------------------------------------------------


def test_normalized_examples(plus_state):
    assert normalized_tc_w_coherence(plus_state, SIGMA_Z, restarts=2) == pytest.approx(1, abs=1e-7)
    assert normalized_tc_w_coherence(plus_state, 5 * SIGMA_Z, restarts=2) == pytest.approx(1, abs=1e-7)
    with pytest.raises(ZeroGenerator):
        normalized_oracle(plus_state, np.zeros((2, 2)))


@given(instances())
def test_normalized_two_paths(inst):
    rho, K = inst
    assert normalized_oracle(rho, K) == pytest.approx(spectral_oracle(rho, K.matrix / K.spectral_radius), abs=1e-9)


def test_permutation_identity():
    rho, K = random_density_matrix(3, seed=2), random_generator(3, seed=3)
    chk = permutation_covariance_check(rho, K, [0, 1, 2])
    assert chk.equal and not chk.non_invariant
    assert chk.lhs == pytest.approx(spectral_oracle(rho, K))
    with pytest.raises(InvalidPermutation):
        permutation_covariance_check(rho, K, [0, 0, 1])


@given(instances(2, 2), st.floats(0, 6), st.floats(0, 6))
def test_qubit_permutation_never_witnessed(inst, p0, p1):
    rho, K = inst
    chk = permutation_covariance_check(rho, K, [1, 0], [p0, p1])
    assert chk.equal and not chk.non_invariant


def test_qutrit_reflection_swap_is_invariant():
    # swapping the outer levels of diag(0, 1, 2) maps K to 2I - K, which has the same coherence
    K = np.diag([0.0, 1.0, 2.0])
    for t in range(50):
        chk = permutation_covariance_check(random_density_matrix(3, seed=(77, t)), K, [2, 1, 0])
        assert chk.equal and not chk.non_invariant


def test_qutrit_permutation_witness():
    K = np.diag([0.0, 1.0, 2.0])
    found = False
    for t in range(50):
        chk = permutation_covariance_check(random_density_matrix(3, seed=(77, t)), K, [1, 0, 2])
        assert chk.equal
        found = found or chk.non_invariant
    assert found
