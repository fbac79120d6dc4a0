from hypothesis import given

from etalecorr.correspondence import validate_correspondence
from etalecorr.generators import (
    SMALL_GROUPS,
    disjoint_union_correspondence,
    morita_family,
    pair_morita,
    quotient_morita,
    random_composable_pair,
    random_groupoid,
    random_homomorphism,
    small_correspondence,
    subgroups,
)
from etalecorr.correspondence import is_homomorphism, is_morita
from etalecorr.groupoid import FiniteGroupoid
from etalecorr.groups import symmetric

from conftest import rng_for, seeds


@given(seeds)
def test_composable_pairs_respect_bounds(seed):
    omega, lam = random_composable_pair(rng_for(seed))
    assert omega.H == lam.G
    for c in (omega, lam):
        assert c.point_count <= 8
        assert c.G.arrow_count <= 8 and c.H.arrow_count <= 8
        assert validate_correspondence(c).ok


@given(seeds)
def test_random_homomorphisms_are_homomorphisms(seed):
    rng = rng_for(seed)
    G, H = random_groupoid(rng, 6), random_groupoid(rng, 6)
    assert is_homomorphism(G, H, random_homomorphism(rng, G, H)).ok


def test_subgroups_of_s3():
    S3 = FiniteGroupoid.group(symmetric(3))
    # trivial, three of order 2, one of order 3, whole group
    assert sorted(len(k) for k in subgroups(S3, S3.units[0])) == [1, 2, 2, 2, 3, 6]


def test_morita_constructions():
    assert is_morita(pair_morita(2, 3, SMALL_GROUPS["Z3"]))
    assert is_morita(quotient_morita(symmetric(3), [0]))
    both = disjoint_union_correspondence(pair_morita(1, 2, SMALL_GROUPS["Z2"]), pair_morita(2, 2, SMALL_GROUPS["Z1"]))
    assert is_morita(both)
    assert len(morita_family(rng_for(0), 20)) == 20


def test_small_correspondence_is_small():
    for seed in range(10):
        assert small_correspondence(rng_for(seed), max_points=3).point_count <= 3
