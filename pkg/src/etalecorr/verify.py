"""Property suites over seeded instance families.

Each suite returns a :class:`SuiteResult` with one :class:`Case` per
instance. Results carry no timing, so the same seed yields the same record.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .bundles import (
    crossed_product_correspondence,
    function_bundle,
    identity_correspondence_bundle,
)
from .correspondence import (
    EtaleCorrespondence,
    canonical_cutoff,
    check_cutoff,
    compose,
    from_homomorphism,
    homomorphism_cutoff,
    identity_correspondence,
    indicator_cutoff,
    is_morita,
    product_cutoff,
)
from .cstar import (
    HilbertBimodule,
    _close,
    adjoint_operator,
    block_decomposition,
    groupoid_algebra,
    k0,
    k0_map,
    min_eigenvalues,
    module_maps,
)
from .generators import (
    SMALL_GROUPS,
    morita_family,
    random_bundle,
    random_coefficient_correspondence,
    random_composable_pair,
    random_groupoid,
    random_gset,
    random_homomorphism,
    small_correspondence,
)
from .groupoid import FiniteGroupoid
from .groups import catalog
from .induction import (
    OperatorFamily,
    compacts_iso,
    induce_correspondence,
    composition_isos,
    composition_point_map,
    induce_operator,
    is_equivariant_family,
    k_theory_map,
    k_theory_routes,
    omega_crossed_product,
    phi_psi_isos,
)
from .report import Report

__all__ = ["Case", "SuiteResult", "SUITES", "run_suite", "run_all", "check_unitary", "conjugacy_classes"]


@dataclass
class Case:
    instance: str
    passed: bool
    detail: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"instance": self.instance, "passed": self.passed, "detail": self.detail}


@dataclass
class SuiteResult:
    name: str
    title: str
    cases: list[Case]
    minimum: int = 1

    @property
    def passed(self) -> bool:
        return len(self.cases) >= self.minimum and all(c.passed for c in self.cases)

    @property
    def failures(self) -> list[Case]:
        return [c for c in self.cases if not c.passed]

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "title": self.title,
            "passed": self.passed,
            "instances": len(self.cases),
            "minimum_instances": self.minimum,
            "failures": len(self.failures),
            "cases": [c.to_dict() for c in self.cases],
        }


def _streams(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _describe(omega: EtaleCorrespondence) -> dict:
    return {"G_arrows": omega.G.arrow_count, "H_arrows": omega.H.arrow_count, "points": omega.point_count}


def check_unitary(U: np.ndarray, source: HilbertBimodule, target: HilbertBimodule, tol: float) -> Report:
    """U: source -> target is a bijective bimodule map preserving inner products."""
    report = Report()
    if U.shape != (target.dimension, source.dimension):
        report.add("dimensions agree", (U.shape, target.dimension, source.dimension))
        return report
    if U.size and np.linalg.matrix_rank(U) != source.dimension:
        report.add("map is bijective")
    lhs = np.einsum("ap,bq,abk->pqk", np.conj(U), U, target.inner, optimize=True)
    if not _close(lhs, source.inner, tol):
        report.add("inner products preserved", float(np.abs(lhs - source.inner).max(initial=0)))
    if not _close(np.einsum("xa,jab->jxb", U, source.ract), np.einsum("jxa,ab->jxb", target.ract, U), tol):
        report.add("right actions intertwined")
    if not _close(np.einsum("xa,iab->ixb", U, source.lact), np.einsum("ixa,ab->ixb", target.lact, U), tol):
        report.add("left actions intertwined")
    return report


def conjugacy_classes(table) -> int:
    """Orbits of conjugation, counted by brute force."""
    n = len(table)
    e = next(i for i in range(n) if all(table[i][g] == g for g in range(n)))
    inv = [next(h for h in range(n) if table[g][h] == e) for g in range(n)]
    seen, count = set(), 0
    for x in range(n):
        if x in seen:
            continue
        count += 1
        seen |= {table[table[g][x]][inv[g]] for g in range(n)}
    return count


# -- suites ------------------------------------------------------------------------------


def suite_conjugacy(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for name, table in catalog().items():
        rank = k0(groupoid_algebra(FiniteGroupoid.group(table))).rank
        classes = conjugacy_classes(table)
        cases.append(Case(name, rank == classes, {"k0_rank": rank, "conjugacy_classes": classes}))
    return SuiteResult("conjugacy", "rank of K0(C*(group)) equals the number of conjugacy classes", cases, 10)


def suite_pair_collapse(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for n in range(2, 7):
        blocks = block_decomposition(groupoid_algebra(FiniteGroupoid.pair(n))).block_dims
        cases.append(Case(f"P{n}", blocks == (n,), {"block_dims": list(blocks)}))
    return SuiteResult("pair-collapse", "C*(P_n) is a single n x n block", cases, 5)


def suite_morita(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for i, omega in enumerate(morita_family(np.random.default_rng(seed), 24)):
        m = is_morita(omega)
        k = k_theory_map(omega)
        cases.append(Case(f"morita-{i}", m.morita and k.is_invertible(),
                          {**_describe(omega), "morita": m.reason, "k0_map": k.tolist()}))
    return SuiteResult("morita", "Morita bispaces induce invertible K0 maps", cases, 20)


def suite_functoriality(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for i, rng in enumerate(_streams(seed, 50)):
        omega, lam = random_composable_pair(rng, max_points=max_size)
        a, b = k_theory_map(omega), k_theory_map(lam)
        c = k_theory_map(compose(omega, lam))
        cases.append(Case(f"pair-{i}", c == b @ a, {
            "omega": _describe(omega), "lambda": _describe(lam),
            "composite": c.tolist(), "product": (b @ a).tolist(),
        }))
    return SuiteResult("functoriality", "K0 of a composite is the product of K0 maps", cases, 50)


def suite_identity(seed: int, tol: float, max_size: int) -> SuiteResult:
    groupoids = [(f"P{n}", FiniteGroupoid.pair(n)) for n in (1, 2, 3)]
    groupoids += [(name, FiniteGroupoid.group(t)) for name, t in SMALL_GROUPS.items()]
    groupoids += [(f"random-{i}", random_groupoid(rng)) for i, rng in enumerate(_streams(seed, 12))]
    cases = []
    for name, G in groupoids:
        k = k_theory_map(identity_correspondence(G))
        cases.append(Case(name, k.is_identity(), {"arrows": G.arrow_count, "k0_map": k.tolist()}))
    return SuiteResult("identity", "identity bispaces induce identity K0 maps", cases, 10)


def suite_factorization(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for i, rng in enumerate(_streams(seed, 30)):
        omega = small_correspondence(rng, max_points=max_size)
        r = k_theory_routes(omega)
        cases.append(Case(f"omega-{i}", r.agree, {
            **_describe(omega), "factored": r.factored.tolist(), "direct": r.direct.tolist(),
        }))
    return SuiteResult("factorization",
                       "K0 of C*(Omega) factors through the rho-bar pullback and Omega ⋉ C", cases, 20)


def _coefficient_instance(rng, max_points: int = 4, nontrivial: bool = False):
    omega = small_correspondence(rng, max_arrows=6, max_points=max_points)
    E = random_coefficient_correspondence(rng, omega.H, max_points=2, nontrivial=nontrivial)
    return omega, E


def suite_positivity(seed: int, tol: float, max_size: int, samples: int = 1000) -> SuiteResult:
    cases = []
    for i, rng in enumerate(_streams(seed, 20)):
        omega, E = _coefficient_instance(rng, min(max_size, 6))
        M = omega_crossed_product(omega, E)
        xs = rng.standard_normal((samples, M.dimension)) + 1j * rng.standard_normal((samples, M.dimension))
        vals = np.einsum("np,nq,pqk->nk", np.conj(xs), xs, M.inner, optimize=True)
        lo, skew = min_eigenvalues(M.right, vals)
        scale = np.maximum(1.0, np.abs(vals).max(axis=1))
        worst = float((lo / scale).min())
        cases.append(Case(f"omega-{i}", worst >= -tol and float(skew.max()) <= tol * float(scale.max()),
                          {**_describe(omega), "module_dimension": M.dimension,
                           "min_eigenvalue": round(worst, 12) if worst < -1e-12 else 0.0}))
    return SuiteResult("positivity", "the crossed-product inner product is positive", cases, 20)


def suite_compacts(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for i, rng in enumerate(_streams(seed, 20)):
        omega, E = _coefficient_instance(rng, min(max_size, 6))
        mod = E.module
        other = identity_correspondence_bundle(E.right).module
        iso = compacts_iso(omega, mod, mod)
        cross = compacts_iso(omega, mod, other)
        report = Report()
        for x in omega.G.units:
            for name, c in (("E->E", iso), ("E->B", cross)):
                ops, secs = len(c.operator_basis(x)), c.section_dimension(x)
                if ops != secs:
                    report.add(f"{name} dimensions agree", (x, ops, secs))
                elif ops and np.linalg.matrix_rank(c.matrix(x)) != ops:
                    report.add(f"{name} map is bijective", x)
            basis = iso.operator_basis(x)
            if not basis:
                continue
            IE = iso.source.fibres[x]
            S = sum(rng.standard_normal() * b for b in basis)
            T = sum(rng.standard_normal() * b for b in basis)
            fs, ft, fst = iso.to_sections(x, S), iso.to_sections(x, T), iso.to_sections(x, S @ T)
            fadj = iso.to_sections(x, adjoint_operator(IE, IE, T))
            for w in omega.fibres[x]:
                Ew = mod.fibres[omega.sigma[w]]
                if not _close(fst[w], fs[w] @ ft[w], tol):
                    report.add("composition preserved", (x, w))
                if not _close(fadj[w], adjoint_operator(Ew, Ew, ft[w]), tol):
                    report.add("adjoint preserved", (x, w))
                for h in omega.H.arrows_to[omega.sigma[w]]:
                    moved = mod.maps[omega.H.inv[h]] @ ft[w] @ mod.maps[h]
                    if not _close(moved, ft[omega.hact(w, h)], tol):
                        report.add("fibre operators are equivariant", (w, h))
            if not _close(iso.from_sections(x, ft), T, tol):
                report.add("sections recover the operator", x)
        cases.append(Case(f"omega-{i}", report.ok, {**_describe(omega), "violations": [str(v) for v in report.violations]}))
    return SuiteResult("compacts", "adjointable operators on Ind E match equivariant fibre operators", cases, 20)


def suite_phi_psi(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for i, rng in enumerate(_streams(seed, 10)):
        omega = small_correspondence(rng, max_arrows=4, max_points=min(max_size, 4))
        E = random_coefficient_correspondence(rng, omega.H, max_points=2)
        L = phi_psi_isos(omega, E)
        report = Report()
        report.extend(check_unitary(L.phi, L.phi_source, L.target, tol), "Phi: ")
        report.extend(check_unitary(L.psi, L.psi_source, L.target, tol), "Psi: ")
        checked = 0
        if report.ok:
            IE = L.induced
            for x in omega.G.units:
                for T in module_maps(IE.fibres[x], IE.fibres[x]):
                    family = {y: np.zeros((IE.fibres[y].dimension,) * 2, dtype=complex) for y in omega.G.units}
                    family[x] = T
                    lhs, rhs = L.transported(family)
                    checked += 1
                    if not _close(lhs, rhs, tol):
                        report.add("operator transport", (x, checked))
        cases.append(Case(f"omega-{i}", report.ok, {
            **_describe(omega), "operators_checked": checked,
            "violations": [str(v) for v in report.violations],
        }))
    return SuiteResult("phi-psi", "Phi and Psi are unitary bimodule isomorphisms that transport operators", cases, 5)


def suite_naturality(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for i, rng in enumerate(_streams(seed, 20)):
        omega, E = _coefficient_instance(rng, min(max_size, 6), nontrivial=True)
        L_ind = crossed_product_correspondence(induce_correspondence(omega, E))
        OC = omega_crossed_product(omega, identity_correspondence_bundle(E.right))
        OB = omega_crossed_product(omega, identity_correspondence_bundle(E.left))
        HE = crossed_product_correspondence(E)
        top = k0_map(OC) @ k0_map(L_ind)
        bottom = k0_map(HE) @ k0_map(OB)
        cases.append(Case(f"omega-{i}", top == bottom, {
            **_describe(omega), "via_induced": top.tolist(), "via_coefficients": bottom.tolist(),
        }))
    return SuiteResult("naturality", "the K0 naturality square commutes", cases, 20)


def suite_cutoff(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    streams = _streams(seed, 30)
    for i, rng in enumerate(streams[:10]):
        omega = small_correspondence(rng, max_points=max_size)
        for name, c in (("canonical", canonical_cutoff(omega)), ("indicator", indicator_cutoff(omega))):
            r = check_cutoff(omega, c)
            cases.append(Case(f"{name}-{i}", r.ok, {"violations": [str(v) for v in r.violations]}))
    for i, rng in enumerate(streams[10:20]):
        omega, lam = random_composable_pair(rng, max_points=max_size)
        ok = True
        for make in (canonical_cutoff, indicator_cutoff):
            c = product_cutoff(omega, lam, make(omega), make(lam))
            ok &= check_cutoff(compose(omega, lam), c).ok
        cases.append(Case(f"product-{i}", ok, {"omega": _describe(omega), "lambda": _describe(lam)}))
    for i, rng in enumerate(streams[20:]):
        G, H = random_groupoid(rng), random_groupoid(rng)
        phi = random_homomorphism(rng, G, H)
        omega = from_homomorphism(G, H, phi)
        c = homomorphism_cutoff(omega)
        indicator = tuple(Fraction(int(H.is_unit(h))) for _, h in omega.labels)
        ok = check_cutoff(omega, c).ok and c.values == indicator
        cases.append(Case(f"homomorphism-{i}", ok, {**_describe(omega), "support": sum(map(int, c.values))}))
    return SuiteResult("cutoff", "cutoff functions sum to one along every right orbit, exactly", cases, 30)


def suite_composition(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for i, rng in enumerate(_streams(seed, 10)):
        omega, lam = random_composable_pair(rng, max_arrows=4, max_points=min(max_size, 4))
        A = random_bundle(rng, lam.H, max_points=2)
        ci = composition_isos(omega, lam, A)
        report = Report()
        report.extend(ci.check_bundle_iso(tol), "phi_A: ")
        source, pulled, U = ci.square(A)
        report.extend(check_unitary(U, source, pulled, tol), "square: ")
        pm = composition_point_map(omega, lam)
        if not (pm.well_defined and pm.bijective and pm.commutes):
            report.add("rho-bar compatibility", {"well_defined": pm.well_defined,
                                                 "bijective": pm.bijective, "commutes": pm.commutes})
        cases.append(Case(f"pair-{i}", report.ok, {
            "omega": _describe(omega), "lambda": _describe(lam),
            "violations": [str(v) for v in report.violations],
        }))
    return SuiteResult("composition", "induction respects composition of correspondences", cases, 10)


def suite_averaging(seed: int, tol: float, max_size: int) -> SuiteResult:
    cases = []
    for i, rng in enumerate(_streams(seed, 20)):
        omega = small_correspondence(rng, max_points=max_size)
        H = omega.H
        W = random_gset(rng, H, max_points=4, allow_empty_fibres=False)
        E = identity_correspondence_bundle(function_bundle(W)).module
        orbit_value = {}
        values = []
        for w in range(W.point_count):
            key = min(W.act[g][w] for g in H.arrows_from[W.anchor[w]])
            orbit_value.setdefault(key, int(rng.integers(-3, 4)))
            values.append(orbit_value[key])
        T = OperatorFamily({y: np.diag([float(values[w]) for w in W.fibres[y]]).astype(complex) for y in H.units})
        ok = is_equivariant_family(E, T)
        for cut in (canonical_cutoff(omega), indicator_cutoff(omega)):
            ind = induce_operator(omega, cut, E, T)
            ok &= all(np.array_equal(ind.at(w), T[omega.sigma[w]]) for w in range(omega.point_count))
        cases.append(Case(f"omega-{i}", bool(ok), _describe(omega)))
    return SuiteResult("averaging", "averaging an equivariant family returns it exactly", cases, 20)


SUITES: dict[str, Callable[[int, float, int], SuiteResult]] = {
    "conjugacy": suite_conjugacy,
    "pair-collapse": suite_pair_collapse,
    "morita": suite_morita,
    "functoriality": suite_functoriality,
    "identity": suite_identity,
    "factorization": suite_factorization,
    "positivity": suite_positivity,
    "compacts": suite_compacts,
    "phi-psi": suite_phi_psi,
    "naturality": suite_naturality,
    "cutoff": suite_cutoff,
    "composition": suite_composition,
    "averaging": suite_averaging,
}


def run_suite(name: str, seed: int = 0, tol: float = 1e-8, max_size: int = 8) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](seed, tol, max_size)


def run_all(seed: int = 0, tol: float = 1e-8, max_size: int = 8) -> list[SuiteResult]:
    return [run_suite(name, seed, tol, max_size) for name in SUITES]
