from math import comb, factorial

import pytest

from etalecorr.cstar import groupoid_algebra, k0
from etalecorr.groupoid import find_groupoid_isomorphism, validate_groupoid
from etalecorr.groups import cyclic, symmetric
from etalecorr.invsemi import (
    InverseSemigroup,
    PartialAction,
    canonical_actions,
    equivariant_topological_correspondence,
    filter_space,
    group_with_zero,
    idempotents,
    semilattice,
    symmetric_inverse_monoid,
    transformation_groupoid,
    validate_partial_action,
    validate_semigroup,
)
from etalecorr.correspondence import validate_correspondence

PARTITIONS = {1: 1, 2: 2, 3: 3}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_symmetric_inverse_monoid_size(n):
    S = symmetric_inverse_monoid(n)
    assert S.element_count == sum(comb(n, k) ** 2 * factorial(k) for k in range(n + 1))
    assert validate_semigroup(S).ok
    assert len(S.idempotent_list) == 2 ** n


@pytest.mark.parametrize("n", [1, 2, 3])
def test_germ_groupoid_of_symmetric_inverse_monoid(n):
    # the groupoid is the disjoint union of P_{C(n,k)} x S_k over k >= 1
    S = symmetric_inverse_monoid(n)
    on_idem, on_filters = canonical_actions(S)
    G = transformation_groupoid(on_idem)
    assert G.arrow_count == S.element_count - 1
    assert len(G.units) == 2 ** n - 1
    assert k0(groupoid_algebra(G)).rank == sum(PARTITIONS[k] for k in range(1, n + 1))
    assert find_groupoid_isomorphism(G, transformation_groupoid(on_filters)) is not None


def test_group_with_zero_gives_the_group():
    S = group_with_zero(symmetric(3))
    assert validate_semigroup(S).ok
    G = transformation_groupoid(canonical_actions(S)[0])
    assert G.arrow_count == 6 and len(G.units) == 1
    assert k0(groupoid_algebra(G)).rank == 3


def test_semilattice_has_trivial_groupoid():
    # chain 0 < 1 < 2
    S = semilattice([[0, 0, 0], [0, 1, 1], [0, 1, 2]])
    assert validate_semigroup(S).ok
    G = transformation_groupoid(canonical_actions(S)[0])
    assert G.arrow_count == len(G.units) == 2


def test_filters_are_principal():
    S = symmetric_inverse_monoid(2)
    fs = filter_space(S)
    assert len(fs.filters) == 3
    for e, chi in zip(fs.points, fs.filters):
        assert e in chi and 0 not in chi


def test_idempotents_commute():
    S = symmetric_inverse_monoid(3)
    E = idempotents(S)
    for e in E.elements:
        for f in E.elements:
            assert E.meet[(e, f)] == E.meet[(f, e)]


def test_non_inverse_semigroup_is_rejected():
    # left-zero band: every element idempotent but ef = e is not commutative
    S = InverseSemigroup(3, ((0, 0, 0), (0, 1, 1), (0, 2, 2)), (0, 1, 2))
    assert not validate_semigroup(S).ok


def test_broken_partial_action_is_reported():
    S = group_with_zero(cyclic(2))
    a = PartialAction(S, 2, ((-1, -1), (0, 1), (0, 0)))
    assert not validate_partial_action(a).ok


def test_equivariant_correspondence_between_transformation_groupoids():
    S = symmetric_inverse_monoid(2)
    X, _ = canonical_actions(S)
    omega = equivariant_topological_correspondence(S, X, X, X, list(range(X.point_count)),
                                                   list(range(X.point_count)))
    assert validate_correspondence(omega).ok
    G = transformation_groupoid(X)
    assert omega.G == G and omega.point_count == G.arrow_count
    assert validate_groupoid(omega.G).ok
