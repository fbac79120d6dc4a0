import numpy as np
from hypothesis import given

from etalecorr.bundles import (
    GCStarBundle,
    column_bundle,
    crossed_product_algebra,
    crossed_product_correspondence,
    crossed_product_module,
    direct_sum_bundle,
    endomorphism_bundle,
    function_bundle,
    identity_correspondence_bundle,
    row_bundle,
    span_correspondence,
    tensor_correspondence,
    trivial_bundle,
    validate_bundle,
    validate_equivariant_correspondence,
    validate_hilbert_bundle,
)
from etalecorr.cstar import groupoid_algebra, identity_bimodule, k0, k0_map, validate_algebra, validate_bimodule
from etalecorr.generators import random_bundle, random_coefficient_correspondence, random_groupoid, random_gset
from etalecorr.groupoid import FiniteGroupoid, GroupoidAction, action_groupoid, translation_action
from etalecorr.groups import cyclic, symmetric

from conftest import rng_for, seeds

S3 = FiniteGroupoid.group(symmetric(3))
Z2 = FiniteGroupoid.group(cyclic(2))


def test_trivial_bundle_gives_groupoid_algebra():
    for G in (S3, FiniteGroupoid.pair(3)):
        assert crossed_product_algebra(trivial_bundle(G)) == groupoid_algebra(G)


def test_identity_correspondence_of_trivial_bundle():
    E = crossed_product_correspondence(identity_correspondence_bundle(trivial_bundle(S3)))
    assert E == identity_bimodule(groupoid_algebra(S3))


@given(seeds)
def test_function_bundle_matches_action_groupoid(seed):
    # C(X) ⋊ G has the same blocks as the algebra of G ⋉ X
    rng = rng_for(seed)
    G = random_groupoid(rng, 6)
    a = random_gset(rng, G, max_points=4)
    A = crossed_product_algebra(function_bundle(a))
    assert sorted(k0(A).block_dims) == sorted(k0(groupoid_algebra(action_groupoid(a))).block_dims)


def test_endomorphism_bundle_is_morita_trivial():
    # End(C^G) ⋊ G for the translation action is a full matrix algebra
    A = crossed_product_algebra(endomorphism_bundle(translation_action(Z2)))
    assert validate_algebra(A).ok
    assert k0(A).block_dims == (4,) or sorted(k0(A).block_dims) == [2, 2]
    assert sum(n * n for n in k0(A).block_dims) == 8


@given(seeds)
def test_random_bundles_validate(seed):
    rng = rng_for(seed)
    G = random_groupoid(rng, 6)
    B = random_bundle(rng, G)
    assert validate_bundle(B).ok
    assert validate_algebra(crossed_product_algebra(B)).ok


def test_broken_cocycle_is_reported():
    B = function_bundle(GroupoidAction(Z2, 2, (0, 0), ((0, 1), (1, 0))))
    bad = GCStarBundle(B.groupoid, B.fibres, (B.maps[0], np.eye(2)[[0, 0]]))
    assert not validate_bundle(bad).ok


def test_direct_sum_adds_fibres():
    a = translation_action(Z2)
    B = direct_sum_bundle(trivial_bundle(Z2), function_bundle(a))
    assert validate_bundle(B).ok
    assert B.fibres[Z2.units[0]].dimension == 3


@given(seeds)
def test_random_coefficient_correspondences_validate(seed):
    rng = rng_for(seed)
    G = random_groupoid(rng, 4)
    E = random_coefficient_correspondence(rng, G, 2)
    assert validate_equivariant_correspondence(E).ok
    assert validate_hilbert_bundle(E.module).ok
    assert validate_bimodule(crossed_product_correspondence(E), samples=10).ok


def test_column_then_row_is_multiplicative_on_k0():
    a = translation_action(FiniteGroupoid.group(cyclic(3)))
    col, row = column_bundle(a), row_bundle(a)
    composed = tensor_correspondence(row, col)
    lhs = k0_map(crossed_product_correspondence(composed))
    rhs = k0_map(crossed_product_correspondence(col)) @ k0_map(crossed_product_correspondence(row))
    assert lhs == rhs


def test_span_correspondence_along_identity_maps():
    a = translation_action(Z2)
    E = span_correspondence(a, a, a, list(range(a.point_count)), list(range(a.point_count)))
    assert validate_equivariant_correspondence(E).ok
    assert k0_map(crossed_product_correspondence(E)).is_identity()


def test_crossed_product_module_dimension():
    E = identity_correspondence_bundle(function_bundle(translation_action(Z2))).module
    M = crossed_product_module(E)
    assert M.dimension == Z2.arrow_count * 2
    assert validate_bimodule(M).ok
