from hypothesis import given

from etalecorr.generators import random_groupoid, random_gset
from etalecorr.groupoid import (
    UNDEFINED,
    FiniteGroupoid,
    GroupoidAction,
    action_groupoid,
    disjoint_union,
    find_groupoid_isomorphism,
    is_free,
    isotropy,
    orbits,
    product_groupoid,
    translation_action,
    unit_action,
    validate_action,
    validate_groupoid,
)
from etalecorr.groups import cyclic, symmetric

from conftest import rng_for, seeds


def test_pair_groupoid_shape():
    P = FiniteGroupoid.pair(3)
    assert P.arrow_count == 9
    assert len(P.units) == 3
    assert validate_groupoid(P).ok
    assert all(len(isotropy(P, u)) == 1 for u in P.units)


def test_composition_convention():
    P = FiniteGroupoid.pair(2)
    for g in range(4):
        for h in range(4):
            assert (P.comp[g][h] != UNDEFINED) == (P.src[g] == P.rng[h])


def test_bad_composition_is_reported():
    P = FiniteGroupoid.pair(2)
    comp = [list(r) for r in P.comp]
    comp[0][0] = 1
    bad = FiniteGroupoid.from_tables(P.units, P.src, P.rng, P.inv, comp)
    assert not validate_groupoid(bad).ok


def test_group_groupoid():
    G = FiniteGroupoid.group(symmetric(3))
    assert len(G.units) == 1
    assert len(isotropy(G, G.units[0])) == 6


def test_opposite_is_involutive():
    G = FiniteGroupoid.group(symmetric(3))
    assert G.opposite().opposite() == G
    assert validate_groupoid(G.opposite()).ok


def test_disjoint_union_and_product():
    A, B = FiniteGroupoid.pair(2), FiniteGroupoid.group(cyclic(3))
    U = disjoint_union(A, B)
    assert U.arrow_count == 7 and len(U.components()) == 2
    Pr = product_groupoid(A, B)
    assert Pr.arrow_count == 12 and validate_groupoid(Pr).ok


def test_isomorphism_search():
    A = product_groupoid(FiniteGroupoid.pair(2), FiniteGroupoid.group(cyclic(2)))
    B = product_groupoid(FiniteGroupoid.group(cyclic(2)), FiniteGroupoid.pair(2))
    assert find_groupoid_isomorphism(A, B) is not None
    assert find_groupoid_isomorphism(FiniteGroupoid.group(cyclic(4)),
                                     FiniteGroupoid.group([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])) is None


def test_translation_action_is_free_and_transitive():
    G = FiniteGroupoid.group(symmetric(3))
    t = translation_action(G)
    assert validate_action(t).ok
    assert is_free(t)
    assert len(orbits(t).classes) == 1


def test_unit_action_orbits_are_components():
    G = disjoint_union(FiniteGroupoid.pair(3), FiniteGroupoid.pair(1))
    assert len(orbits(unit_action(G)).classes) == 2


def test_fixed_points_are_not_free():
    G = FiniteGroupoid.group(cyclic(2))
    a = GroupoidAction(G, 1, (0,), ((0,), (0,)))
    assert validate_action(a).ok
    assert not is_free(a)


def test_invalid_action_is_reported():
    G = FiniteGroupoid.group(cyclic(3))
    a = GroupoidAction(G, 3, (0, 0, 0), ((0, 1, 2), (1, 2, 0), (1, 2, 0)))
    assert not validate_action(a).ok


@given(seeds)
def test_random_groupoids_validate(seed):
    G = random_groupoid(rng_for(seed))
    assert G.arrow_count <= 8
    assert validate_groupoid(G).ok


@given(seeds)
def test_random_gsets_and_action_groupoids_validate(seed):
    rng = rng_for(seed)
    G = random_groupoid(rng)
    a = random_gset(rng, G, max_points=6)
    assert validate_action(a).ok
    GX = action_groupoid(a)
    assert validate_groupoid(GX).ok
    assert len(GX.units) == a.point_count


@given(seeds)
def test_inverse_is_two_sided(seed):
    G = random_groupoid(rng_for(seed))
    for g in range(G.arrow_count):
        assert G.comp[g][G.inv[g]] == G.rng[g]
        assert G.comp[G.inv[g]][g] == G.src[g]
