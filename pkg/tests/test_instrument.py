import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edlab import (
    KrausInstrument,
    MeasuringProcess,
    OutcomeSpace,
    VonNeumannAlgebra,
    builders,
    choi_matrix,
    instrument_from_measuring_process,
    marginal_structures,
    measuring_process_from_instrument,
    minimal_dilation,
    statistically_equivalent,
)
from edlab import operator_core as oc
from edlab.exceptions import DimensionError, MembershipError, OutcomeSpaceError

from conftest import I2, SX, SY, SZ, random_density

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def projective_z(alg):
    return builders.projective_instrument(alg.element([SZ]))


def test_outcome_space_validation():
    assert OutcomeSpace([1, -1]).dim == 1
    assert OutcomeSpace([(0, 1), (1, 0)]).dim == 2
    with pytest.raises(OutcomeSpaceError):
        OutcomeSpace([1.0, 1.0])
    with pytest.raises(OutcomeSpaceError):
        OutcomeSpace([1.0, (1.0, 2.0)])
    with pytest.raises(OutcomeSpaceError):
        OutcomeSpace([1.0]).index(2.0)


def test_construction_checks(m2, m2_in_m4):
    with pytest.raises(MembershipError, match="complete"):
        KrausInstrument(m2, [0], [[np.eye(2) * 0.5]])
    with pytest.raises(MembershipError, match="leaves the algebra"):
        # conjugating by a swap-like unitary maps M2(x)1 onto 1(x)M2
        swap = np.eye(4)[[0, 2, 1, 3]]
        KrausInstrument(m2_in_m4, [0], [[swap]])
    with pytest.raises(DimensionError):
        KrausInstrument(m2, [0], [[np.eye(3)]])


def test_dual_apply_examples(m2):
    instr = projective_z(m2)
    assert instr.dual_apply(m2.identity()).allclose(m2.identity())
    p_plus = m2.element([np.diag([1.0, 0.0])])
    assert instr.dual_apply(m2.element([SZ]), 1.0).allclose(p_plus)


def test_dual_apply_additive(rng):
    alg = builders.random_algebra(rng, 4)
    instr = builders.random_instrument(rng, alg, 3)
    x = builders.random_observable(rng, alg)
    labs = instr.labels
    parts = sum((instr.dual_apply(x, lab) for lab in labs), alg.zero())
    assert parts.allclose(instr.dual_apply(x), atol=1e-12)
    pair = instr.dual_apply(x, [labs[0], labs[1]])
    assert pair.allclose(instr.dual_apply(x, labs[0]) + instr.dual_apply(x, labs[1]), atol=1e-12)


def test_predual_examples(m2):
    instr = projective_z(m2)
    plus_x = m2.state_from_vector([1, 1])
    assert instr.predual_apply(plus_x).trace == pytest.approx(1.0)
    assert instr.predual_apply(plus_x, 1.0).trace == pytest.approx(0.5)


def test_duality(rng):
    alg = builders.random_algebra(rng, 5)
    instr = builders.random_instrument(rng, alg, 3)
    state = builders.random_state(rng, alg)
    for lab in instr.labels:
        x = builders.random_observable(rng, alg) + 1j * builders.random_observable(rng, alg)
        assert abs(instr.predual_apply(state, lab)(x) - state(instr.dual_apply(x, lab))) < 1e-9


def test_probabilities_and_post_state(m2, rng):
    instr = projective_z(m2)
    up = m2.state_from_vector([1, 0])
    assert instr.outcome_probability(up, 1.0) == pytest.approx(1.0)
    post = instr.post_state(up, 1.0)
    np.testing.assert_allclose(post.densities[0], np.diag([1.0, 0.0]), atol=1e-15)
    # zero-probability outcome falls back to the total state change
    fallback = instr.post_state(up, -1.0)
    np.testing.assert_allclose(fallback.densities[0], np.diag([1.0, 0.0]), atol=1e-15)

    alg = builders.random_algebra(rng, 4)
    rnd = builders.random_instrument(rng, alg, 4)
    state = builders.random_state(rng, alg)
    probs = [rnd.outcome_probability(state, lab) for lab in rnd.labels]
    assert sum(probs) == pytest.approx(1.0)
    labs = rnd.labels
    assert rnd.outcome_probability(state, labs[:2]) <= rnd.outcome_probability(state, labs[:3]) + 1e-12


def test_joint_probability(m2, rng):
    instr = projective_z(m2)
    mixed = m2.maximally_mixed()
    sz = m2.element([SZ])
    assert instr.joint_probability(mixed, sz, None, 1.0) == pytest.approx(0.5)
    assert instr.joint_probability(mixed, sz, (0.5, 1.5)) == pytest.approx(0.5)
    assert instr.joint_probability(mixed, sz, lambda v: v > 0) == pytest.approx(0.5)

    alg = builders.random_algebra(rng, 4)
    rnd = builders.random_instrument(rng, alg, 3)
    obs = builders.random_observable(rng, alg)
    r1, r2 = builders.random_state(rng, alg), builders.random_state(rng, alg)
    lab = rnd.labels[0]
    mix = r1.mix(r2, 0.3)
    lhs = rnd.joint_probability(mix, obs, (0.0, 2.0), lab)
    rhs = (0.3 * rnd.joint_probability(r1, obs, (0.0, 2.0), lab)
           + 0.7 * rnd.joint_probability(r2, obs, (0.0, 2.0), lab))
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_povm_and_moments(m2, rng):
    a = builders.random_observable(rng, VonNeumannAlgebra.full(3))
    instr = builders.projective_instrument(a)
    assert instr.moment_operator(1).allclose(a, atol=1e-12)
    assert instr.moment_operator(2).allclose(a @ a, atol=1e-12)
    triv = builders.trivial_instrument(m2)
    assert triv.moment_operator(1).norm() == 0 and triv.moment_operator(2).norm() == 0

    alg = builders.random_algebra(rng, 4)
    rnd = builders.random_instrument(rng, alg, 4)
    effects = rnd.povm()
    assert sum(effects, alg.zero()).allclose(alg.identity(), atol=1e-10)
    first = rnd.moment_operator(1)
    var = rnd.moment_operator(2) - first @ first
    assert min(np.linalg.eigvalsh(b)[0] for b in var.blocks) > -1e-10


def test_moments_need_scalar_labels(m2):
    seq = builders.sequential_instrument(projective_z(m2), projective_z(m2))
    with pytest.raises(OutcomeSpaceError):
        seq.moment_operator(1)


def test_choi_is_psd(rng):
    alg = builders.random_algebra(rng, 4)
    instr = builders.random_instrument(rng, alg, 3)
    for lab in instr.labels:
        assert np.linalg.eigvalsh(choi_matrix(instr, lab))[0] > -1e-9


def test_builders_examples(m2, rng):
    assert projective_z(m2).labels == (1.0, -1.0)
    triv = builders.trivial_instrument(m2)
    x = m2.element([SX + 0.5 * SY])
    assert triv.channel(x).allclose(x)
    alg = builders.random_algebra(rng, 6)
    a = builders.random_instrument(7, alg, 3)
    b = builders.random_instrument(7, alg, 3)
    assert a.labels == b.labels
    assert all(np.array_equal(p, q) for ka, kb in zip(a.kraus, b.kraus) for p, q in zip(ka, kb))


def test_process_from_controlled_flip(m2):
    mp = builders.controlled_flip_process(m2)
    assert statistically_equivalent(mp, projective_z(m2), algebra=m2, tol=1e-9)


def test_process_identity_coupling(m2, rng):
    sigma = random_density(rng, 3)
    projs = [np.diag([1.0, 0, 0]), np.diag([0, 1.0, 1.0])]
    mp = MeasuringProcess(sigma, [0.0, 1.0], projs, np.eye(6))
    instr = instrument_from_measuring_process(mp, m2)
    x = m2.element([SX + 2 * SZ])
    for lab, f in zip([0.0, 1.0], projs):
        weight = np.trace(sigma @ f).real
        assert instr.dual_apply(x, lab).allclose(x * weight, atol=1e-12)


def test_pure_and_mixed_probe_equivalent(m2):
    """A probe mixture over states the coupling treats identically changes nothing."""
    shift = np.array([[0, 1], [1, 0]])
    pz = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    u = np.kron(pz[0], np.eye(4)) + np.kron(pz[1], np.kron(shift, np.eye(2)))
    meter = [np.kron(np.diag([1.0, 0.0]), np.eye(2)), np.kron(np.diag([0.0, 1.0]), np.eye(2))]
    pure = np.zeros((4, 4))
    pure[0, 0] = 1
    mixed = np.diag([0.5, 0.5, 0.0, 0.0])
    a = MeasuringProcess(pure, [1.0, -1.0], meter, u)
    b = MeasuringProcess(mixed, [1.0, -1.0], meter, u)
    assert statistically_equivalent(a, b, algebra=m2)


def test_process_subset_condition(m2_in_m4):
    swap = np.eye(4)[[0, 2, 1, 3]]
    mp = MeasuringProcess(np.eye(1), [0.0], [np.eye(1)], swap)
    with pytest.raises(MembershipError):
        instrument_from_measuring_process(mp, m2_in_m4)


def test_statistical_equivalence_examples(m2):
    z = projective_z(m2)
    assert statistically_equivalent(z, z)
    x = builders.projective_instrument(m2.element([SX]))
    assert not statistically_equivalent(z, x)
    with pytest.raises(OutcomeSpaceError):
        statistically_equivalent(z, builders.trivial_instrument(m2))


def test_process_round_trip(rng):
    alg = builders.random_algebra(rng, 4)
    instr = builders.random_instrument(rng, alg, 3)
    mp = measuring_process_from_instrument(instr)
    assert statistically_equivalent(mp, instr, algebra=alg)


def test_random_process_on_full_algebra(rng):
    mp = builders.random_measuring_process(rng, 3, n_outcomes=3, probe_dim=4)
    alg = VonNeumannAlgebra.full(3)
    instr = mp.instrument(alg)
    # defining identity (id (x) sigma)[U^dagger (x (x) F(s)) U] on generators
    for lab, f in zip(mp.outcomes.labels, mp.meter_projections):
        for *_, unit in alg.matrix_units():
            big = mp.unitary.conj().T @ np.kron(unit.embed(), f) @ mp.unitary
            slice_ = oc.partial_trace(big @ np.kron(np.eye(3), mp.probe_state), (3, 4), 2)
            np.testing.assert_allclose(instr.dual_apply(unit, lab).embed(), slice_, atol=1e-9)


def check_dilation(instr):
    dil = minimal_dilation(instr)
    v = dil.isometry
    space = dil.space
    assert oc.fro(v.conj().T @ v - np.eye(space.dim)) <= 1e-10
    units = [u for *_, u in instr.algebra.matrix_units()]
    for lab in instr.labels:
        e = dil.E(lab)
        for unit in units:
            target = space.left_matrix(instr.dual_apply(unit, lab))
            assert oc.fro(target - dil.reconstruct(unit, lab)) <= 1e-9
            pi = dil.pi(unit)
            assert oc.fro(e @ pi - pi @ e) <= 1e-9
    assert dil.minimality_rank() == dil.dim
    return dil


def test_dilation_projective_full(rng):
    a = builders.random_observable(rng, VonNeumannAlgebra.full(3))
    check_dilation(builders.projective_instrument(a))


def test_dilation_identity_channel(m2):
    dil = check_dilation(builders.trivial_instrument(m2))
    assert dil.dim == dil.space.dim
    x = m2.element([SX + 0.3 * SZ])
    v = dil.isometry
    np.testing.assert_allclose(v.conj().T @ dil.pi(x) @ v, dil.space.left_matrix(x), atol=1e-12)


def test_dilation_on_subalgebra(m2_in_m4, rng):
    check_dilation(builders.random_instrument(rng, m2_in_m4, 3))


def test_dilation_independent_of_kraus_decomposition(rng):
    alg = builders.random_algebra(rng, 4)
    instr = builders.random_instrument(rng, alg, 2)
    mixed = []
    for ops in instr.kraus:
        n = len(ops)
        u = builders.random_unitary(rng, n)
        mixed.append([sum(u[i, j] * ops[j] for j in range(n)) for i in range(n)])
    other = KrausInstrument(alg, instr.labels, mixed)
    assert statistically_equivalent(instr, other)
    d1, d2 = minimal_dilation(instr), minimal_dilation(other)
    assert d1.dim == d2.dim
    for *_, unit in alg.matrix_units():
        for lab in instr.labels:
            assert oc.fro(d1.reconstruct(unit, lab) - d2.reconstruct(unit, lab)) < 1e-9


def test_marginals_of_product(m2):
    z, x = projective_z(m2), builders.projective_instrument(m2.element([SX]))
    seq = builders.sequential_instrument(z, x)
    marg = marginal_structures(seq)
    assert sum(marg.povm_x.values(), m2.zero()).allclose(m2.identity())
    assert sum(marg.povm_y.values(), m2.zero()).allclose(m2.identity())
    # the marginal POVMs are the factors; the x-marginal instrument also carries
    # the state change of the second measurement, so only effects are compared
    for lab, eff in zip(z.labels, z.povm()):
        assert marg.povm_x[lab].allclose(eff)
    assert marg.first_x.allclose(m2.element([SZ]))
    # y statistics of sx measured after sz: completely randomized
    assert marg.first_y.allclose(m2.zero(), atol=1e-12)
    assert marg.second_y.allclose(m2.identity())


def test_marginal_of_degenerate_y(rng):
    alg = builders.random_algebra(rng, 4)
    instr = builders.random_instrument(rng, alg, 3)
    paired = instr.relabel([(lab, 0.0) for lab in instr.labels])
    assert statistically_equivalent(marginal_structures(paired).x, instr)


def test_marginals_need_pairs(m2):
    with pytest.raises(OutcomeSpaceError):
        marginal_structures(projective_z(m2))


@settings(max_examples=20, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=2, max_value=5),
       n_out=st.integers(min_value=1, max_value=4))
def test_random_instruments_are_well_formed(seed, dim, n_out):
    rng = np.random.default_rng(seed)
    alg = builders.random_algebra(rng, dim, proper=bool(rng.integers(2)))
    instr = builders.random_instrument(rng, alg, n_out)
    d = alg.ambient_dim
    total = sum(k.conj().T @ k for ops in instr.kraus for k in ops)
    assert oc.fro(total - np.eye(d)) < 1e-10
    assert instr.channel(alg.identity()).allclose(alg.identity(), atol=1e-10)
    for lab in instr.labels:
        assert np.linalg.eigvalsh(choi_matrix(instr, lab))[0] > -1e-9
    state = builders.random_state(rng, alg)
    x = builders.random_observable(rng, alg)
    lab = instr.labels[0]
    assert abs(instr.predual_apply(state, lab)(x) - state(instr.dual_apply(x, lab))) < 1e-9


@settings(max_examples=10, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=2, max_value=4),
       n_out=st.integers(min_value=1, max_value=3))
def test_random_dilations(seed, dim, n_out):
    rng = np.random.default_rng(seed)
    alg = builders.random_algebra(rng, dim, proper=bool(rng.integers(2)))
    check_dilation(builders.random_instrument(rng, alg, n_out))
