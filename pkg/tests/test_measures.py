import json

import numpy as np
import pytest

from asmlab.errors import InvalidInputError
from asmlab.measures import (
    DensityOperator,
    Povm,
    Pvm,
    SampleSpace,
    born_prob,
    indicator,
    is_projective,
    naimark_dilate,
    naimark_residual,
    povm_from_json,
    povm_to_json,
    pvm_from_selfadjoint,
    riesz_bound_residual,
    spectrum,
)
from asmlab.operators import DEFAULT_TOL, op_norm
from asmlab.sampling import random_density, random_povm
from asmlab.smearing import smear, stochastic2
from asmlab.spin import MINUS, PLUS, SIGMA_1, SIGMA_3, SPIN_SPACE, BallPoint, povm_from_point


def two_atom_diag():
    space = SampleSpace.from_labels(("a", "b"))
    return Povm(space, (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)))


def test_apply_examples():
    povm = two_atom_diag()
    assert np.array_equal(povm.apply(povm.space.event([0])), np.diag([1.0, 0.0]))
    assert np.array_equal(povm.apply(povm.space.empty_event()), np.zeros((2, 2)))
    half = Povm(SPIN_SPACE, (np.eye(2) / 2, np.eye(2) / 2))
    assert np.allclose(half.apply(SPIN_SPACE.full_event()), np.eye(2), atol=1e-15)


def test_apply_space_mismatch():
    povm = two_atom_diag()
    with pytest.raises(InvalidInputError):
        povm.apply(SPIN_SPACE.event([0]))


def test_apply_additivity_exact():
    rng = np.random.default_rng(1)
    povm = random_povm(rng, 5, 4)
    e1 = povm.space.event([0, 2])
    e2 = povm.space.event([1])
    lhs = povm.apply(e1.union(e2))
    rhs = povm.apply(e1) + povm.apply(e2)
    # same ascending summation order on both sides keeps this exact
    assert op_norm(lhs - rhs) <= 1e-14


def test_integrate_constant_and_indicator():
    rng = np.random.default_rng(2)
    povm = random_povm(rng, 4, 3)
    assert op_norm(povm.integrate(lambda atom: 1.0) - np.eye(4)) <= 1e-12
    event = povm.space.event([1, 2])
    assert op_norm(povm.integrate(indicator(event)) - povm.apply(event)) <= 1e-14


def test_integrate_recovers_selfadjoint():
    pvm = pvm_from_selfadjoint(SIGMA_3)
    t = pvm.integrate(lambda atom: atom.coordinate[0])
    assert op_norm(t - SIGMA_3) <= 1e-8


def test_integrate_positive_for_positive_coefficients():
    rng = np.random.default_rng(3)
    for _ in range(200):
        povm = random_povm(rng, int(rng.integers(2, 6)), int(rng.integers(2, 5)))
        f = rng.uniform(0.0, 3.0, size=povm.space.n_atoms)
        out = povm.integrate(f)
        assert np.min(np.linalg.eigvalsh((out + out.conj().T) / 2)) >= -DEFAULT_TOL.psd_tol


def test_riesz_bound_residual():
    rng = np.random.default_rng(4)
    povm = random_povm(rng, 4, 3)
    assert riesz_bound_residual(povm, np.zeros(3)) == 0.0
    for _ in range(100):
        povm = random_povm(rng, int(rng.integers(2, 7)), int(rng.integers(2, 6)))
        f = rng.standard_normal(povm.space.n_atoms) + 1j * rng.standard_normal(povm.space.n_atoms)
        assert riesz_bound_residual(povm, f) <= 1e-9


def test_positive_map_round_trip_exact():
    rng = np.random.default_rng(5)
    for _ in range(100):
        povm = random_povm(rng, int(rng.integers(2, 7)), int(rng.integers(2, 6)))
        effects = tuple(
            povm.integrate(indicator(povm.space.event([k])))
            for k in range(povm.space.n_atoms)
        )
        rebuilt = Povm(povm.space, effects, povm.tol)
        for old, new in zip(povm.effects, rebuilt.effects):
            assert np.max(np.abs(old - new)) <= 1e-12


def test_pvm_from_selfadjoint_sigma3():
    pvm = pvm_from_selfadjoint(SIGMA_3)
    coords = [a.coordinate[0] for a in pvm.space.atoms]
    assert coords == [-1.0, 1.0]
    assert np.allclose(pvm.effects[0], np.diag([0.0, 1.0]), atol=1e-12)
    assert np.allclose(pvm.effects[1], np.diag([1.0, 0.0]), atol=1e-12)


def test_pvm_from_selfadjoint_degenerate_identity():
    pvm = pvm_from_selfadjoint(np.eye(3))
    assert pvm.space.n_atoms == 1
    assert np.allclose(pvm.effects[0], np.eye(3), atol=1e-12)


def test_pvm_from_selfadjoint_sigma1():
    pvm = pvm_from_selfadjoint(SIGMA_1)
    assert np.allclose(pvm.effects[0], 0.5 * (np.eye(2) - SIGMA_1), atol=1e-12)
    assert np.allclose(pvm.effects[1], 0.5 * (np.eye(2) + SIGMA_1), atol=1e-12)


def test_pvm_invariants_enforced():
    with pytest.raises(InvalidInputError):
        Pvm(SPIN_SPACE, (np.eye(2) / 2, np.eye(2) / 2))


def test_naimark_scalar_example():
    space = SampleSpace.from_labels(("heads", "tails"))
    povm = Povm(space, (np.array([[0.5]]), np.array([[0.5]])))
    dilated, v = naimark_dilate(povm)
    assert v.shape == (2, 1)
    assert np.allclose(v.conj().T @ v, [[1.0]], atol=1e-12)
    assert np.allclose(np.abs(v), np.full((2, 1), 1 / np.sqrt(2)), atol=1e-12)
    assert naimark_residual(povm) <= 1e-12


def test_naimark_on_projective_input():
    pvm = pvm_from_selfadjoint(SIGMA_3)
    assert naimark_residual(pvm) <= 1e-12


def test_naimark_spin_half_ball_point():
    spin = povm_from_point(BallPoint((0.0, 0.0, 0.5)))
    povm = spin.to_povm()
    dilated, v = naimark_dilate(povm)
    assert dilated.dim == 4
    assert naimark_residual(povm) <= 1e-10


def test_naimark_random_sweep():
    rng = np.random.default_rng(6)
    for _ in range(100):
        povm = random_povm(rng, int(rng.integers(2, 9)), int(rng.integers(2, 7)))
        assert naimark_residual(povm) <= 1e-8


def test_naimark_requires_normalization():
    space = SampleSpace.from_labels(("a",))
    povm = Povm(space, (np.array([[0.5]]),))
    with pytest.raises(InvalidInputError):
        naimark_dilate(povm)


def test_spectrum_and_cospectrum():
    space = SampleSpace.from_labels(("a", "b", "c"))
    povm = Povm(
        space,
        (
            np.diag([1.0, 0.0]).astype(complex) / 2,
            np.zeros((2, 2), dtype=complex),
            np.diag([0.0, 1.0]).astype(complex) / 2,
        ),
    )
    spec = spectrum(povm)
    assert spec.sorted_members == (0, 2)
    cospec = spec.complement()
    assert op_norm(povm.apply(cospec)) <= povm.space.n_atoms * DEFAULT_TOL.rank_tol
    assert op_norm(povm.apply(spec) - povm.apply(space.full_event())) <= 1e-12


def test_spectrum_all_zero():
    space = SampleSpace.from_labels(("a", "b"))
    povm = Povm(space, (np.zeros((2, 2)), np.zeros((2, 2))))
    assert len(spectrum(povm)) == 0


def test_born_prob_full_event_and_eigenstate():
    rng = np.random.default_rng(7)
    povm = random_povm(rng, 4, 3)
    rho = random_density(rng, 4)
    assert abs(born_prob(povm, povm.space.full_event(), rho) - 1.0) <= 1e-10
    pvm = pvm_from_selfadjoint(SIGMA_3)
    up = DensityOperator.pure([1.0, 0.0])  # eigenstate slot: atom with coordinate +1
    assert abs(born_prob(pvm, pvm.space.event([1]), up) - 1.0) <= 1e-12


def test_born_prob_matches_confidence_measure():
    # smeared sharp measurement probed in an eigenstate reproduces the kernel row
    sharp = povm_from_point(BallPoint((0.0, 0.0, 1.0)))
    pvm = Pvm(SPIN_SPACE, (sharp.a_plus, sharp.a_minus))
    kernel = stochastic2()
    family = smear(pvm, kernel)
    up = DensityOperator.pure([1.0, 0.0])
    for h in (1.0, 0.5, 0.125):
        got = born_prob(family.at(h), PLUS, up)
        assert abs(got - (1.0 - h / 2.0)) <= 1e-12
        got_minus = born_prob(family.at(h), MINUS, up)
        assert abs(got_minus - h / 2.0) <= 1e-12


def test_born_prob_additive_and_bounded():
    rng = np.random.default_rng(8)
    povm = random_povm(rng, 5, 4)
    rho = random_density(rng, 5)
    e1 = povm.space.event([0, 3])
    e2 = povm.space.event([1])
    total = born_prob(povm, e1.union(e2), rho)
    assert abs(total - born_prob(povm, e1, rho) - born_prob(povm, e2, rho)) <= 1e-12
    assert -DEFAULT_TOL.psd_tol <= total <= 1.0 + DEFAULT_TOL.psd_tol


def test_born_prob_dim_mismatch():
    rng = np.random.default_rng(9)
    povm = random_povm(rng, 4, 3)
    with pytest.raises(InvalidInputError):
        born_prob(povm, povm.space.full_event(), DensityOperator.maximally_mixed(3))


def test_is_projective():
    assert is_projective(pvm_from_selfadjoint(SIGMA_3))
    assert not is_projective(Povm(SPIN_SPACE, (np.eye(2) / 2, np.eye(2) / 2)))
    sharp = povm_from_point(BallPoint((1.0, 0.0, 0.0)))
    assert is_projective(sharp.to_povm())


def test_serialization_bit_exact_round_trip():
    rng = np.random.default_rng(10)
    povm = random_povm(rng, 3, 4)
    text = povm_to_json(povm)
    back = povm_from_json(text)
    assert back.space == povm.space
    for old, new in zip(povm.effects, back.effects):
        assert np.array_equal(old, new)
    # a second pass through text is byte-identical
    assert povm_to_json(back) == text


def test_serialization_keeps_metadata():
    space = SampleSpace.from_points([(0.0, 1.0), (2.0, 3.0)], weights=[0.5, 1.5])
    povm = Povm(space, (np.eye(2) / 2, np.eye(2) / 2))
    data = json.loads(povm_to_json(povm))
    assert data["atoms"][0]["coord"] == [0.0, 1.0]
    assert data["atoms"][1]["weight"] == 1.5


def test_event_algebra():
    space = SampleSpace.from_labels(("a", "b", "c"))
    e1 = space.event(["a", "b"])
    e2 = space.event(["b", "c"])
    assert e1.intersection(e2).sorted_members == (1,)
    assert e1.union(e2).sorted_members == (0, 1, 2)
    assert e1.complement().sorted_members == (2,)
    assert not e1.is_disjoint(e2)
    other = SampleSpace.from_labels(("a", "b", "c", "d"))
    with pytest.raises(InvalidInputError):
        e1.union(other.event([0]))


def test_povm_invariant_violations():
    space = SampleSpace.from_labels(("a", "b"))
    with pytest.raises(InvalidInputError):
        Povm(space, (np.eye(2), np.eye(2)))  # total exceeds identity
    with pytest.raises(InvalidInputError):
        Povm(space, (SIGMA_3, np.eye(2) - SIGMA_3))  # negative effect
