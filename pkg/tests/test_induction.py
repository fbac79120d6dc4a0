import numpy as np
import pytest
from hypothesis import given

from etalecorr.bundles import (
    crossed_product_algebra,
    function_bundle,
    identity_correspondence_bundle,
    trivial_bundle,
    validate_bundle,
    validate_equivariant_correspondence,
    validate_hilbert_bundle,
)
from etalecorr.correspondence import (
    canonical_cutoff,
    from_homomorphism,
    identity_correspondence,
    indicator_cutoff,
)
from etalecorr.cstar import k0, validate_bimodule
from etalecorr.generators import (
    random_bundle,
    random_coefficient_correspondence,
    random_composable_pair,
    random_gset,
    small_correspondence,
)
from etalecorr.groupoid import FiniteGroupoid, translation_action
from etalecorr.groups import cyclic, symmetric
from etalecorr.induction import (
    OperatorFamily,
    composition_isos,
    composition_point_map,
    e_omega,
    equivariant_extension,
    induce_algebra,
    induce_correspondence,
    induce_module,
    induce_operator,
    is_equivariant_family,
    k_theory_map,
    k_theory_routes,
    omega_crossed_product,
    phi_psi_isos,
    sections,
)
from etalecorr.verify import check_unitary

from conftest import rng_for, seeds

S3 = FiniteGroupoid.group(symmetric(3))


def test_induction_along_identity_keeps_fibre_dimensions():
    B = function_bundle(translation_action(S3))
    A = induce_algebra(identity_correspondence(S3), B)
    assert validate_bundle(A).ok
    assert A.fibres[S3.units[0]].dimension == B.fibres[S3.units[0]].dimension
    assert k0(crossed_product_algebra(A)).block_dims == k0(crossed_product_algebra(B)).block_dims


def test_induction_along_homomorphism_pulls_back():
    # one orbit per unit, so Ind B at x is B at phi(x)
    Z2 = FiniteGroupoid.group(cyclic(2))
    P2 = FiniteGroupoid.pair(2)
    omega = from_homomorphism(P2, Z2, [0, 0, 0, 0])
    B = function_bundle(translation_action(Z2))
    A = induce_algebra(omega, B)
    assert {A.fibres[x].dimension for x in P2.units} == {2}


@given(seeds)
def test_induced_bundles_validate(seed):
    rng = rng_for(seed)
    omega = small_correspondence(rng, max_arrows=6, max_points=6)
    A = induce_algebra(omega, random_bundle(rng, omega.H, 2))
    assert validate_bundle(A).ok


@given(seeds)
def test_induced_correspondences_validate(seed):
    rng = rng_for(seed)
    omega = small_correspondence(rng, max_arrows=6, max_points=6)
    E = random_coefficient_correspondence(rng, omega.H, 2)
    assert validate_equivariant_correspondence(induce_correspondence(omega, E)).ok
    assert validate_hilbert_bundle(induce_module(omega, E.module)).ok


@given(seeds)
def test_sections_round_trip(seed):
    rng = rng_for(seed)
    omega = small_correspondence(rng, max_arrows=6, max_points=6)
    IB = induce_algebra(omega, random_bundle(rng, omega.H, 2))
    for x in omega.G.units:
        xi = rng.standard_normal(IB.fibres[x].dimension)
        sec = sections(IB, x, xi)
        assert np.allclose(equivariant_extension(IB, x, sec_restricted(omega, sec)), xi)


def sec_restricted(omega, sec):
    """Keep one point per orbit, the last one met."""
    part = omega.right_orbits
    chosen = {part.class_of[w]: w for w in sec}
    return {w: sec[w] for w in chosen.values()}


def test_extension_rejects_points_of_one_orbit():
    omega = identity_correspondence(S3)
    IB = induce_algebra(omega, trivial_bundle(S3))
    with pytest.raises(ValueError):
        equivariant_extension(IB, S3.units[0], {0: [1.0], 1: [1.0]})


@given(seeds)
def test_averaging_fixes_equivariant_families(seed):
    rng = rng_for(seed)
    omega = small_correspondence(rng, max_points=8)
    W = random_gset(rng, omega.H, 4, allow_empty_fibres=False)
    E = identity_correspondence_bundle(function_bundle(W)).module
    orbit = {}
    values = [orbit.setdefault(min(W.act[g][w] for g in omega.H.arrows_from[W.anchor[w]]),
                               float(rng.integers(-3, 4))) for w in range(W.point_count)]
    T = OperatorFamily({y: np.diag([values[w] for w in W.fibres[y]]).astype(complex) for y in omega.H.units})
    assert is_equivariant_family(E, T)
    for c in (canonical_cutoff(omega), indicator_cutoff(omega)):
        ind = induce_operator(omega, c, E, T)
        assert ind.is_equivariant()
        assert all(np.array_equal(ind.at(w), T[omega.sigma[w]]) for w in range(omega.point_count))


def test_averaging_makes_any_family_equivariant():
    Z2 = FiniteGroupoid.group(cyclic(2))
    omega = identity_correspondence(Z2)
    E = identity_correspondence_bundle(function_bundle(translation_action(Z2))).module
    T = OperatorFamily({0: np.diag([1.0, 0.0]).astype(complex)})
    assert not is_equivariant_family(E, T)
    ind = induce_operator(omega, canonical_cutoff(omega), E, T)
    assert ind.is_equivariant()
    assert np.allclose(ind.at(0), np.eye(2) / 2)


@given(seeds)
def test_k_theory_routes_agree(seed):
    omega = small_correspondence(rng_for(seed), max_points=8)
    r = k_theory_routes(omega)
    assert r.agree
    assert k_theory_map(omega) == r.direct


def test_e_omega_is_valid():
    omega = small_correspondence(rng_for(5), max_points=6)
    assert validate_equivariant_correspondence(e_omega(omega)).ok


def test_identity_bispace_gives_identity_map():
    assert k_theory_map(identity_correspondence(S3)).is_identity()


@given(seeds)
def test_crossed_module_validates(seed):
    rng = rng_for(seed)
    omega = small_correspondence(rng, max_arrows=6, max_points=4)
    E = random_coefficient_correspondence(rng, omega.H, 2)
    assert validate_bimodule(omega_crossed_product(omega, E), samples=20).ok


def test_phi_and_psi_are_unitary():
    rng = rng_for(11)
    omega = small_correspondence(rng, max_arrows=4, max_points=4)
    E = random_coefficient_correspondence(rng, omega.H, 2)
    L = phi_psi_isos(omega, E)
    assert check_unitary(L.phi, L.phi_source, L.target, 1e-8).ok
    assert check_unitary(L.psi, L.psi_source, L.target, 1e-8).ok
    assert not check_unitary(2 * L.phi, L.phi_source, L.target, 1e-8).ok


def test_composition_isomorphisms():
    rng = rng_for(2)
    omega, lam = random_composable_pair(rng, max_arrows=4, max_points=4)
    A = random_bundle(rng, lam.H, 2)
    ci = composition_isos(omega, lam, A)
    assert ci.check_bundle_iso().ok
    source, pulled, U = ci.square(A)
    assert check_unitary(U, source, pulled, 1e-8).ok
    pm = composition_point_map(omega, lam)
    assert pm.well_defined and pm.bijective and pm.commutes
