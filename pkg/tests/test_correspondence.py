from fractions import Fraction

import pytest
from hypothesis import given

from etalecorr.correspondence import (
    EtaleCorrespondence,
    action_correspondence,
    canonical_cutoff,
    check_cutoff,
    compose,
    composition_classes,
    find_bispace_isomorphism,
    from_homomorphism,
    homomorphism_cutoff,
    identity_correspondence,
    indicator_cutoff,
    is_homomorphism,
    is_morita,
    opposite_correspondence,
    product_cutoff,
    transversal,
    validate_correspondence,
)
from etalecorr.generators import (
    morita_family,
    pair_morita,
    random_composable_pair,
    random_correspondence,
    random_groupoid,
    random_homomorphism,
    small_correspondence,
)
from etalecorr.groupoid import FiniteGroupoid, GroupoidAction
from etalecorr.groups import cyclic, symmetric
from etalecorr.induction import k_theory_map
from etalecorr.report import ValidationError

from conftest import rng_for, seeds

Z2 = FiniteGroupoid.group(cyclic(2))
S3 = FiniteGroupoid.group(symmetric(3))


def test_identity_bispace_is_the_groupoid():
    omega = identity_correspondence(S3)
    assert omega.point_count == 6
    assert validate_correspondence(omega).ok
    assert is_morita(omega)


def test_homomorphism_bispace_points():
    P2, pt = FiniteGroupoid.pair(2), FiniteGroupoid.point()
    omega = from_homomorphism(P2, pt, [0, 0, 0, 0])
    # G^0 x_{H^0} H
    assert omega.point_count == 2
    assert validate_correspondence(omega).ok


def test_non_homomorphism_is_rejected():
    assert not is_homomorphism(Z2, Z2, [1, 1]).ok
    with pytest.raises(ValidationError):
        from_homomorphism(Z2, Z2, [1, 1])


def test_swapped_actions_fail_validation():
    omega = identity_correspondence(S3)
    broken = EtaleCorrespondence(omega.left, GroupoidAction(
        omega.right.groupoid, omega.point_count, omega.sigma,
        tuple(tuple(reversed(r)) if i == 1 else r for i, r in enumerate(omega.right.act)),
    ))
    assert not validate_correspondence(broken).ok


def test_non_transitive_action_is_not_morita():
    fixed = GroupoidAction(Z2, 2, (0, 0), ((0, 1), (0, 1)))
    m = is_morita(action_correspondence(fixed))
    assert not m
    assert "rho-bar" in m.reason and "injective" in m.reason


@pytest.mark.parametrize("n,m", [(1, 2), (2, 3), (3, 1)])
def test_pair_morita_inverts_through_opposite(n, m):
    omega = pair_morita(n, m, cyclic(2))
    res = is_morita(omega)
    assert res.morita
    back = compose(omega, res.witness)
    assert find_bispace_isomorphism(back, identity_correspondence(omega.G)) is not None


@given(seeds)
def test_left_and_right_identity_laws(seed):
    omega = small_correspondence(rng_for(seed), max_points=6)
    assert find_bispace_isomorphism(compose(identity_correspondence(omega.G), omega), omega) is not None
    assert find_bispace_isomorphism(compose(omega, identity_correspondence(omega.H)), omega) is not None


@given(seeds)
def test_composition_is_associative_up_to_isomorphism(seed):
    rng = rng_for(seed)
    omega, lam = random_composable_pair(rng, max_arrows=4, max_points=4)
    mu = random_correspondence(rng, lam.H, random_groupoid(rng, 4), max_points=4)
    a = compose(compose(omega, lam), mu)
    b = compose(omega, compose(lam, mu))
    assert find_bispace_isomorphism(a, b) is not None


@given(seeds)
def test_homomorphisms_compose(seed):
    rng = rng_for(seed)
    G, H, K = random_groupoid(rng, 6), random_groupoid(rng, 6), random_groupoid(rng, 6)
    phi, psi = random_homomorphism(rng, G, H), random_homomorphism(rng, H, K)
    direct = from_homomorphism(G, K, [psi[phi[g]] for g in range(G.arrow_count)])
    assert find_bispace_isomorphism(compose(from_homomorphism(G, H, phi), from_homomorphism(H, K, psi)),
                                    direct) is not None


@given(seeds)
def test_opposite_is_involutive(seed):
    omega = small_correspondence(rng_for(seed), max_points=6)
    assert find_bispace_isomorphism(opposite_correspondence(opposite_correspondence(omega)), omega) is not None


@given(seeds)
def test_composite_is_valid_and_classes_partition_pairs(seed):
    omega, lam = random_composable_pair(rng_for(seed), max_points=6)
    cc = composition_classes(omega, lam)
    assert sum(len(c) for c in cc.partition.classes) == len(cc.pairs)
    assert validate_correspondence(compose(omega, lam)).ok


@given(seeds)
def test_cutoffs_are_exact(seed):
    omega = small_correspondence(rng_for(seed), max_points=8)
    for c in (canonical_cutoff(omega), indicator_cutoff(omega)):
        assert check_cutoff(omega, c).ok
        assert all(isinstance(v, Fraction) for v in c.values)


@given(seeds)
def test_product_cutoff_is_exact(seed):
    omega, lam = random_composable_pair(rng_for(seed), max_points=6)
    c = product_cutoff(omega, lam, canonical_cutoff(omega), canonical_cutoff(lam))
    assert check_cutoff(compose(omega, lam), c).ok


def test_canonical_cutoff_spreads_over_isotropy():
    omega = identity_correspondence(S3)
    assert set(canonical_cutoff(omega).values) == {Fraction(1, 6)}
    assert sorted(indicator_cutoff(omega).values) == [0] * 5 + [1]


def test_homomorphism_cutoff_is_unit_indicator():
    omega = from_homomorphism(Z2, FiniteGroupoid.pair(2), [0, 0])
    c = homomorphism_cutoff(omega)
    assert check_cutoff(omega, c).ok
    assert [int(v) for v in c.values] == [int(omega.H.is_unit(h)) for _, h in omega.labels]


def test_homomorphism_cutoff_needs_homomorphism_labels():
    with pytest.raises(ValueError):
        homomorphism_cutoff(action_correspondence(GroupoidAction(Z2, 2, (0, 0), ((0, 1), (1, 0)))))


def test_transversal_offsets_are_unique():
    omega = small_correspondence(rng_for(3), max_points=8)
    t = transversal(omega)
    for w in range(omega.point_count):
        assert omega.hact(t.rep_of(omega, w), t.offset_arrow[w]) == w


def test_k_theory_of_homomorphism_to_point():
    pt = FiniteGroupoid.point()
    assert k_theory_map(from_homomorphism(FiniteGroupoid.pair(2), pt, [0] * 4)).tolist() == [[1]]
    # only the trivial character survives the collapse of Z2
    assert sorted(k_theory_map(from_homomorphism(Z2, pt, [0, 0])).tolist()[0]) == [0, 1]


def test_morita_family_is_morita():
    for omega in morita_family(rng_for(0), 6):
        assert is_morita(omega)
        assert k_theory_map(omega).is_invertible()
