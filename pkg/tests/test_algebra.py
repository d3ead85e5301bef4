import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edlab import AlgebraElement, NormalState, VonNeumannAlgebra, state_expectation
from edlab import builders
from edlab import operator_core as oc
from edlab.exceptions import (
    AlgebraMismatchError,
    DimensionError,
    MembershipError,
    NotPositiveError,
)

from conftest import I2, SINGLET, SX, SY, SZ, random_density, random_hermitian


def test_block_structure_checks():
    alg = VonNeumannAlgebra([(2, 1), (1, 3)])
    assert alg.ambient_dim == 5
    assert alg.dimension == 5
    assert not alg.is_full
    with pytest.raises(DimensionError):
        VonNeumannAlgebra([(2, 0)])
    with pytest.raises(DimensionError):
        VonNeumannAlgebra([(2, 1)], basis_change=np.ones((2, 2)))


def test_embed_example(m2_in_m4):
    x = m2_in_m4.element([SX])
    np.testing.assert_array_equal(x.embed(), np.kron(SX, I2))
    np.testing.assert_array_equal(m2_in_m4.identity().embed(), np.eye(4))


def test_embed_is_homomorphism(rng):
    alg = builders.random_algebra(rng, 5)
    x = builders.random_observable(rng, alg) + 0.3j * builders.random_observable(rng, alg)
    y = builders.random_observable(rng, alg)
    np.testing.assert_allclose(x.embed() @ y.embed(), (x @ y).embed(), atol=1e-12)


def test_conditional_expectation_examples(rng, m2_in_m4):
    x = m2_in_m4.element([random_hermitian(rng, 2)])
    assert m2_in_m4.conditional_expectation(x.embed()).allclose(x, atol=1e-12)
    assert m2_in_m4.conditional_expectation(np.kron(SX, SZ)).norm() < 1e-15
    alg = builders.random_algebra(rng, 6)
    y = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    once = alg.conditional_expectation(y)
    assert alg.conditional_expectation(once.embed()).allclose(once, atol=1e-12)


def test_conditional_expectation_is_unital(rng):
    alg = builders.random_algebra(rng, 6)
    assert alg.conditional_expectation(np.eye(6)).allclose(alg.identity(), atol=1e-12)


def test_contains_examples(rng, m2_in_m4, m4):
    assert m2_in_m4.contains(np.kron(SX, I2))
    assert not m2_in_m4.contains(np.kron(SX, SX))
    assert m4.contains(random_hermitian(rng, 4))


def test_element_from_ambient_rejects_outsiders(m2_in_m4):
    with pytest.raises(MembershipError):
        m2_in_m4.element_from_ambient(np.kron(SX, SX))


def test_restrict_state_singlet(m2_in_m4):
    state = m2_in_m4.restrict_state(np.outer(SINGLET, SINGLET.conj()))
    np.testing.assert_allclose(state.densities[0], I2 / 2, atol=1e-15)


def test_restrict_state_full_is_identity(rng, m4):
    rho = random_density(rng, 4)
    np.testing.assert_allclose(m4.restrict_state(rho).densities[0], rho, atol=1e-15)


def test_restrict_state_pairing(rng):
    alg = builders.random_algebra(rng, 6)
    rho = random_density(rng, 6)
    state = alg.restrict_state(rho)
    for _ in range(20):
        x = builders.random_observable(rng, alg) + 1j * builders.random_observable(rng, alg)
        assert abs(state(x) - np.trace(rho @ x.embed())) < 1e-10


def test_restrict_state_rejects_bad_density(m4):
    with pytest.raises(NotPositiveError):
        m4.restrict_state(np.diag([1.5, -0.5, 0, 0]))


def test_state_expectation_examples(rng, m2):
    state = builders.random_state(rng, builders.random_algebra(rng, 4))
    assert state_expectation(state, state.algebra.identity()) == pytest.approx(1.0)
    assert abs(state_expectation(m2.maximally_mixed(), m2.element([SZ]))) < 1e-15
    up = m2.state_from_vector([1, 0])
    assert state_expectation(up, m2.element([SZ])) == pytest.approx(1.0)


def test_extension_is_canonical(rng):
    alg = VonNeumannAlgebra([(2, 2), (1, 1)])
    state = builders.random_state(rng, alg)
    amb = state.ambient()
    d0 = state.densities[0]
    np.testing.assert_allclose(amb[:4, :4], np.kron(d0, I2 / 2), atol=1e-15)
    assert alg.restrict_state(amb).densities[0] == pytest.approx(d0)


def test_normal_state_validation(m2):
    with pytest.raises(NotPositiveError):
        NormalState(m2, [np.diag([0.7, 0.7])])
    with pytest.raises(NotPositiveError):
        NormalState(m2, [np.diag([1.2, -0.2])])


def test_mixing_elements_of_different_algebras(m2, m4):
    with pytest.raises(AlgebraMismatchError):
        m2.identity() + m4.identity()


def test_element_arithmetic(m2):
    x = m2.element([SX])
    assert (x @ x).allclose(m2.identity())
    assert (x + 1).allclose(m2.element([SX + I2]))
    assert (2 - x).allclose(m2.element([2 * I2 - SX]))
    assert (x * 2 / 4).allclose(m2.element([SX / 2]))
    assert m2.element([SY]).is_self_adjoint()
    assert not m2.element([SX + 1j * SZ]).is_self_adjoint()
    assert m2.element([SZ]).operator_norm() == pytest.approx(1.0)


def test_elements_are_immutable(m2):
    x = m2.element([SX])
    with pytest.raises(ValueError):
        x.blocks[0][0, 0] = 5


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=2, max_value=8))
def test_conditional_expectation_is_completely_positive(seed, dim):
    rng = np.random.default_rng(seed)
    alg = builders.random_algebra(rng, dim)
    choi = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim))
            e[i, j] = 1
            choi += np.kron(e, alg.conditional_expectation(e).embed())
    assert np.linalg.eigvalsh(choi)[0] > -1e-10


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=2, max_value=6))
def test_contains_embed_and_covariance(seed, dim):
    rng = np.random.default_rng(seed)
    alg = builders.random_algebra(rng, dim)
    x = builders.random_observable(rng, alg)
    assert alg.contains(x.embed())
    w = builders.random_unitary(rng, dim)
    moved = VonNeumannAlgebra(alg.blocks, w @ alg.basis_change)
    y = rng.normal(size=(dim, dim)) + 0j
    for op in (x.embed(), y):
        assert alg.contains(op) == moved.contains(w @ op @ w.conj().T)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=2, max_value=6))
def test_restriction_duality(seed, dim):
    rng = np.random.default_rng(seed)
    alg = builders.random_algebra(rng, dim)
    rho = random_density(rng, dim)
    x = builders.random_observable(rng, alg)
    assert abs(alg.restrict_state(rho)(x) - np.trace(rho @ x.embed())) < 1e-10
