"""Induction along étale correspondences.

For ``Omega: G -> H`` and an H-bundle B, the fibre of Ind_Omega B over a
unit x of G is the space of sections xi on Omega^x with
xi(w.h) = h^-1.xi(w). Such a section is determined by its values on a
transversal of Omega^x / H, so the fibre is stored as the direct sum of
B_{sigma(r)} over the chosen representatives r, and the value at
w = r.h is recovered by the evaluation map ``alpha_{h^-1}`` on r's block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .bundles import (
    EquivariantCorrespondence,
    GCStarBundle,
    GHilbertBundle,
    _block_diag,
    arrow_offsets,
    crossed_product_algebra,
    crossed_product_correspondence,
    identity_correspondence_bundle,
    trivial_bundle,
    validate_equivariant_correspondence,
)
from .correspondence import (
    CutoffFunction,
    EtaleCorrespondence,
    Transversal,
    check_cutoff,
    compose,
    composition_classes,
    transversal,
    validate_correspondence,
)
from .cstar import (
    ATOL,
    FinDimCStarAlgebra,
    HilbertBimodule,
    InteriorTensor,
    K0Map,
    _close,
    complex_numbers,
    direct_sum,
    groupoid_algebra,
    identity_bimodule,
    k0_map,
    module_maps,
    tensor_product,
)
from .groupoid import orbit_partition
from .report import Report, ValidationError

__all__ = [
    "InducedBundle",
    "InducedModule",
    "InducedCorrespondence",
    "OmegaCrossedModule",
    "OperatorFamily",
    "InducedOperator",
    "CompactsIso",
    "TensorIsos",
    "CompositionIsos",
    "FactorizationError",
    "induce_algebra",
    "induce_module",
    "induce_correspondence",
    "equivariant_extension",
    "sections",
    "compacts_iso",
    "induce_operator",
    "is_equivariant_family",
    "omega_crossed_product",
    "phi_psi_isos",
    "e_omega",
    "cstar_correspondence",
    "k_theory_routes",
    "k_theory_map",
    "composition_isos",
    "composition_point_map",
]


# -- layout of induced fibres ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Layout:
    """Block structure of an induced fibre for coefficient spaces of
    dimension ``dims[y]`` moved around by ``hmaps``."""

    omega: EtaleCorrespondence
    cut: Transversal
    dims: Mapping[int, int]
    hmaps: Sequence[np.ndarray]

    @cached_property
    def offsets(self) -> dict[int, np.ndarray]:
        out = {}
        for x in self.omega.G.units:
            sizes = [self.dims[self.omega.sigma[r]] for r in self.cut.reps[x]]
            out[x] = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        return out

    def dimension(self, x: int) -> int:
        return int(self.offsets[x][-1])

    def evaluation(self, w: int) -> np.ndarray:
        """Matrix of xi -> xi(w) on the fibre over rho(w)."""
        x = self.omega.rho[w]
        pos = self.cut.position[w]
        h = self.cut.offset_arrow[w]
        H = self.omega.H
        off = self.offsets[x]
        out = np.zeros((self.dims[self.omega.sigma[w]], self.dimension(x)), dtype=complex)
        out[:, off[pos]:off[pos + 1]] = self.hmaps[H.inv[h]]
        return out

    def arrow_map(self, g: int) -> np.ndarray:
        """(g.xi)(w) = xi(g^-1.w), one block row per representative over rng(g)."""
        G = self.omega.G
        gi = G.inv[g]
        rows = [self.evaluation(self.omega.gact(gi, r)) for r in self.cut.reps[G.rng[g]]]
        if not rows:
            return np.zeros((0, self.dimension(G.src[g])), dtype=complex)
        return np.vstack(rows)

    def arrow_maps(self) -> list[np.ndarray]:
        return [self.arrow_map(g) for g in range(self.omega.G.arrow_count)]


def _layout(omega: EtaleCorrespondence, dims, hmaps) -> _Layout:
    return _Layout(omega, transversal(omega), dict(dims), tuple(hmaps))


def _require_valid(omega: EtaleCorrespondence, H) -> None:
    report = validate_correspondence(omega)
    if not report.ok:
        raise ValidationError("invalid correspondence", report)
    if omega.H != H:
        raise ValueError("coefficients do not live over the right groupoid of the correspondence")


@dataclass(frozen=True, eq=False)
class InducedBundle(GCStarBundle):
    correspondence: EtaleCorrespondence = None  # type: ignore[assignment]
    coefficients: GCStarBundle = None  # type: ignore[assignment]
    layout: _Layout = field(default=None, repr=False)  # type: ignore[assignment]

    def evaluation(self, w: int) -> np.ndarray:
        return self.layout.evaluation(w)


@dataclass(frozen=True, eq=False)
class InducedModule(GHilbertBundle):
    correspondence: EtaleCorrespondence = None  # type: ignore[assignment]
    source: GHilbertBundle = None  # type: ignore[assignment]
    layout: _Layout = field(default=None, repr=False)  # type: ignore[assignment]

    def evaluation(self, w: int) -> np.ndarray:
        return self.layout.evaluation(w)


@dataclass(frozen=True, eq=False)
class InducedCorrespondence(EquivariantCorrespondence):
    correspondence: EtaleCorrespondence = None  # type: ignore[assignment]
    source: EquivariantCorrespondence = None  # type: ignore[assignment]
    layout: _Layout = field(default=None, repr=False)  # type: ignore[assignment]

    def evaluation(self, w: int) -> np.ndarray:
        return self.layout.evaluation(w)


def induce_algebra(omega: EtaleCorrespondence, B: GCStarBundle) -> InducedBundle:
    """Ind_Omega B as a G-bundle, with pointwise operations over Omega."""
    _require_valid(omega, B.groupoid)
    H = B.groupoid
    lay = _layout(omega, {y: B.fibres[y].dimension for y in H.units}, B.maps)
    fibres = {
        x: direct_sum([B.fibres[omega.sigma[r]] for r in lay.cut.reps[x]]) for x in omega.G.units
    }
    return InducedBundle(omega.G, fibres, lay.arrow_maps(), correspondence=omega, coefficients=B, layout=lay)


def _outer_sum(modules: Sequence[HilbertBimodule], left: FinDimCStarAlgebra,
               right: FinDimCStarAlgebra) -> HilbertBimodule:
    """E_1 ⊕ ... ⊕ E_n as a correspondence ⊕A_i -> ⊕B_i."""
    n = sum(E.dimension for E in modules)
    lact = np.zeros((left.dimension, n, n), dtype=complex)
    ract = np.zeros((right.dimension, n, n), dtype=complex)
    inner = np.zeros((n, n, right.dimension), dtype=complex)
    e = a = b = 0
    for E in modules:
        s = slice(e, e + E.dimension)
        lact[a:a + E.left.dimension, s, s] = E.lact
        ract[b:b + E.right.dimension, s, s] = E.ract
        inner[s, s, b:b + E.right.dimension] = E.inner
        e += E.dimension
        a += E.left.dimension
        b += E.right.dimension
    return HilbertBimodule(left, right, lact, ract, inner)


def induce_correspondence(omega: EtaleCorrespondence, E: EquivariantCorrespondence) -> InducedCorrespondence:
    _require_valid(omega, E.groupoid)
    H = E.groupoid
    left, right = induce_algebra(omega, E.left), induce_algebra(omega, E.right)
    lay = _layout(omega, {y: E.fibres[y].dimension for y in H.units}, E.maps)
    fibres = {
        x: _outer_sum([E.fibres[omega.sigma[r]] for r in lay.cut.reps[x]], left.fibres[x], right.fibres[x])
        for x in omega.G.units
    }
    return InducedCorrespondence(left, right, fibres, lay.arrow_maps(),
                                 correspondence=omega, source=E, layout=lay)


def induce_module(omega: EtaleCorrespondence, E: GHilbertBundle) -> InducedModule:
    _require_valid(omega, E.groupoid)
    H = E.groupoid
    right = induce_algebra(omega, E.coefficients)
    lay = _layout(omega, {y: E.fibres[y].dimension for y in H.units}, E.maps)
    C = complex_numbers()
    fibres = {}
    for x in omega.G.units:
        parts = [E.fibres[omega.sigma[r]] for r in lay.cut.reps[x]]
        left = direct_sum([C] * len(parts))
        S = _outer_sum(parts, left, right.fibres[x])
        fibres[x] = HilbertBimodule(C, right.fibres[x], np.eye(S.dimension)[None], S.ract, S.inner)
    return InducedModule(right, fibres, lay.arrow_maps(), correspondence=omega, source=E, layout=lay)


# -- sections ------------------------------------------------------------------------


def sections(induced, x: int, xi: np.ndarray) -> dict[int, np.ndarray]:
    """The equivariant section w -> xi(w) on Omega^x for a fibre vector."""
    omega = induced.layout.omega
    return {w: induced.layout.evaluation(w) @ xi for w in omega.fibres[x]}


def equivariant_extension(induced, x: int, eta: Mapping[int, np.ndarray]) -> np.ndarray:
    """Fibre vector of the extension w.h -> h^-1.eta(w) of a section given
    on one point of every H-orbit in Omega^x."""
    lay: _Layout = induced.layout
    omega = lay.omega
    part = omega.right_orbits
    hit: dict[int, int] = {}
    for w in eta:
        if omega.rho[w] != x:
            raise ValueError(f"point {w} does not lie over unit {x}")
        c = part.class_of[w]
        if c in hit:
            raise ValueError(f"points {hit[c]} and {w} lie in the same orbit")
        hit[c] = w
    needed = {part.class_of[r] for r in lay.cut.reps[x]}
    if set(hit) != needed:
        raise ValueError("the given points do not meet every orbit over x")
    xi = np.zeros(lay.dimension(x), dtype=complex)
    off = lay.offsets[x]
    for pos, r in enumerate(lay.cut.reps[x]):
        w = hit[part.class_of[r]]
        # w = r.h, so xi(r) = h.eta(w)
        xi[off[pos]:off[pos + 1]] = lay.hmaps[lay.cut.offset_arrow[w]] @ np.asarray(eta[w], dtype=complex)
    return xi


# -- operators on induced modules -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """One module operator per unit of H, acting on the fibre of E there."""

    ops: Mapping[int, np.ndarray]

    def __getitem__(self, y: int) -> np.ndarray:
        return self.ops[y]


def _validate_family(E: GHilbertBundle, T: OperatorFamily, tol: float = ATOL) -> Report:
    report = Report()
    for y in E.groupoid.units:
        Ey = E.fibres[y]
        Ty = np.asarray(T[y])
        if Ty.shape != (Ey.dimension, Ey.dimension):
            report.add("operator shape matches fibre", y)
        elif not _close(np.einsum("xy,jyz->jxz", Ty, Ey.ract), np.einsum("jxy,yz->jxz", Ey.ract, Ty), tol):
            report.add("operator commutes with the right action", y)
    return report


def is_equivariant_family(E: GHilbertBundle, T: OperatorFamily, tol: float = 0.0) -> bool:
    """h.T_{s(h)} = T_{r(h)} for every arrow h (exactly when tol is 0)."""
    H = E.groupoid
    for h in range(H.arrow_count):
        moved = E.maps[h] @ T[H.src[h]] @ E.maps[H.inv[h]]
        same = _close(moved, T[H.rng[h]], tol) if tol else np.array_equal(moved, T[H.rng[h]])
        if not same:
            return False
    return True


@dataclass(frozen=True, eq=False)
class InducedOperator:
    """Ind_{Omega,c} T as an equivariant family of fibre operators over Omega."""

    induced: InducedModule
    values: Mapping[int, np.ndarray]

    def at(self, w: int) -> np.ndarray:
        return self.values[w]

    def fibre(self, x: int) -> np.ndarray:
        """The operator on the induced fibre over x (block diagonal)."""
        reps = self.induced.layout.cut.reps[x]
        if not reps:
            return np.zeros((0, 0), dtype=complex)
        return _block_diag([self.values[r] for r in reps])

    def is_equivariant(self) -> bool:
        """Ind T(w.h) = h^-1.Ind T(w), exactly."""
        omega = self.induced.correspondence
        H, maps = omega.H, self.induced.source.maps
        for w in range(omega.point_count):
            for h in H.arrows_to[omega.sigma[w]]:
                moved = maps[H.inv[h]] @ self.values[w] @ maps[h]
                if not np.array_equal(moved, self.values[omega.hact(w, h)]):
                    return False
        return True


def induce_operator(omega: EtaleCorrespondence, c: CutoffFunction, E: GHilbertBundle,
                    T: OperatorFamily) -> InducedOperator:
    """(Ind T)(w) = sum over h in H^{sigma(w)} of c(w.h) (h.T_{s(h)}).

    Terms with byte-identical matrices are merged with exact rational
    weights first, so an equivariant family is reproduced exactly."""
    report = check_cutoff(omega, c)
    report.extend(_validate_family(E, T))
    if not report.ok:
        raise ValidationError("invalid cutoff or operator family", report)
    H = omega.H
    induced = induce_module(omega, E)
    values = {}
    for w in range(omega.point_count):
        groups: dict[bytes, list] = {}
        for h in H.arrows_to[omega.sigma[w]]:
            weight = c[omega.hact(w, h)]
            if weight == 0:
                continue
            M = E.maps[h] @ np.asarray(T[H.src[h]], dtype=complex) @ E.maps[H.inv[h]]
            M = M + 0.0  # normalise negative zeros so equal matrices share bytes
            entry = groups.setdefault(M.tobytes(), [M, Fraction(0)])
            entry[1] += weight
        dim = E.fibres[omega.sigma[w]].dimension
        total = np.zeros((dim, dim), dtype=complex)
        for M, weight in groups.values():
            total = total + (M if weight == 1 else float(weight) * M)
        values[w] = total
    return InducedOperator(induced, values)


@dataclass(frozen=True, eq=False)
class CompactsIso:
    """Operators Ind E -> Ind F over x versus equivariant families of fibre
    operators on Omega^x."""

    source: InducedModule
    target: InducedModule

    def to_sections(self, x: int, T: np.ndarray) -> dict[int, np.ndarray]:
        """w -> T_w with T_w xi(w) = (T xi)(w)."""
        omega = self.source.correspondence
        out = {}
        for w in omega.fibres[x]:
            ev_e = self.source.evaluation(w)
            out[w] = self.target.evaluation(w) @ T @ np.linalg.pinv(ev_e)
        return out

    def from_sections(self, x: int, family: Mapping[int, np.ndarray]) -> np.ndarray:
        reps = self.source.layout.cut.reps[x]
        if not reps:
            return np.zeros((self.target.layout.dimension(x), self.source.layout.dimension(x)), dtype=complex)
        return _block_diag([family[r] for r in reps])

    def operator_basis(self, x: int) -> list[np.ndarray]:
        return module_maps(self.source.fibres[x], self.target.fibres[x])

    def section_dimension(self, x: int) -> int:
        """Dimension of the induced operator bundle: one block of fibre
        operators per orbit representative."""
        omega = self.source.correspondence
        E, F = self.source.source, self.target.source
        return sum(
            len(module_maps(E.fibres[omega.sigma[r]], F.fibres[omega.sigma[r]]))
            for r in self.source.layout.cut.reps[x]
        )

    def matrix(self, x: int) -> np.ndarray:
        """Coordinates of the section blocks of each basis operator, as columns."""
        cols = []
        reps = self.source.layout.cut.reps[x]
        for T in self.operator_basis(x):
            fam = self.to_sections(x, T)
            cols.append(np.concatenate([fam[r].reshape(-1) for r in reps]) if reps else np.zeros(0))
        if not cols:
            return np.zeros((0, 0), dtype=complex)
        return np.array(cols).T


def compacts_iso(omega: EtaleCorrespondence, E: GHilbertBundle, F: GHilbertBundle) -> CompactsIso:
    if E.coefficients != F.coefficients:
        raise ValueError("modules over different coefficient bundles")
    return CompactsIso(induce_module(omega, E), induce_module(omega, F))


# -- crossed products by a correspondence -------------------------------------------------


@dataclass(frozen=True, eq=False)
class OmegaCrossedModule(HilbertBimodule):
    """Omega ⋉ E: G ⋉ Ind_Omega B -> H ⋉ C on the sum of E_{sigma(w)} over
    the points w of Omega; ``offsets[w]`` starts w's block."""

    correspondence: EtaleCorrespondence = None  # type: ignore[assignment]
    coefficient: EquivariantCorrespondence = None  # type: ignore[assignment]
    induced: InducedBundle = field(default=None, repr=False)  # type: ignore[assignment]
    offsets: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def block(self, w: int) -> slice:
        return slice(int(self.offsets[w]), int(self.offsets[w + 1]))


def omega_crossed_product(omega: EtaleCorrespondence, E: EquivariantCorrespondence) -> OmegaCrossedModule:
    """Inner product <xi, eta>(h) = sum over w of <h^-1.xi(w), eta(w.h)>,
    right action (w, e)(l, c) = (w.l, (l^-1.e) c) and left action
    (k, b)(w, e) = (k.w, b(w) e)."""
    _require_valid(omega, E.groupoid)
    report = validate_equivariant_correspondence(E, samples=0)
    if not report.ok:
        raise ValidationError("invalid equivariant correspondence", report)
    G, H = omega.G, omega.H
    IB = induce_algebra(omega, E.left)
    left = crossed_product_algebra(IB)
    right = crossed_product_algebra(E.right)
    off_c = arrow_offsets(H, lambda u: E.right.fibres[u].dimension)
    off_g = arrow_offsets(G, lambda u: IB.fibres[u].dimension)
    sizes = [E.fibres[omega.sigma[w]].dimension for w in range(omega.point_count)]
    off = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    n = int(off[-1])

    def blk(w):
        return slice(off[w], off[w + 1])

    inner = np.zeros((n, n, right.dimension), dtype=complex)
    for w in range(omega.point_count):
        for h in H.arrows_to[omega.sigma[w]]:
            U = E.maps[H.inv[h]]
            inner[blk(w), blk(omega.hact(w, h)), off_c[h]:off_c[h + 1]] = np.einsum(
                "ap,aqc->pqc", np.conj(U), E.fibres[H.src[h]].inner
            )
    ract = np.zeros((right.dimension, n, n), dtype=complex)
    for l in range(H.arrow_count):
        Fs = E.fibres[H.src[l]]
        back = E.maps[H.inv[l]]
        for j in range(E.right.fibres[H.src[l]].dimension):
            op = Fs.ract[j] @ back
            for w in omega.right.fibres[H.rng[l]]:
                ract[off_c[l] + j, blk(omega.hact(w, l)), blk(w)] = op
    lact = np.zeros((left.dimension, n, n), dtype=complex)
    for w in range(omega.point_count):
        ops = np.einsum("mi,mab->iab", IB.evaluation(w), E.fibres[omega.sigma[w]].lact)
        for k in G.arrows_from[omega.rho[w]]:
            kw = omega.gact(k, w)
            lact[off_g[k]:off_g[k + 1], blk(kw), blk(w)] = ops
    return OmegaCrossedModule(left, right, lact, ract, inner,
                              correspondence=omega, coefficient=E, induced=IB, offsets=off)


def _lifted(T_alg: np.ndarray, source: InteriorTensor) -> np.ndarray:
    return T_alg @ source.lift


@dataclass(frozen=True, eq=False)
class TensorIsos:
    """Phi: (G ⋉ Ind E) ⊗ (Omega ⋉ C) -> Omega ⋉ E and
    Psi: (Omega ⋉ B) ⊗ (H ⋉ E) -> Omega ⋉ E on quotient coordinates."""

    phi: np.ndarray
    psi: np.ndarray
    phi_source: InteriorTensor
    psi_source: InteriorTensor
    target: OmegaCrossedModule
    induced: InducedCorrespondence

    def transported(self, T: Mapping[int, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
        """For module operators T_x on the fibres of Ind_Omega E, return
        Phi (G⋉T ⊗ 1) Phi^-1 and the pointwise operator w -> T_w on Omega ⋉ E."""
        IE = self.induced
        omega = IE.correspondence
        G = omega.G
        GE = self.phi_source.factors[0]
        off = arrow_offsets(G, lambda u: IE.fibres[u].dimension)
        GT = np.zeros((GE.dimension, GE.dimension), dtype=complex)
        for g in range(G.arrow_count):
            s = slice(off[g], off[g + 1])
            GT[s, s] = IE.maps[G.inv[g]] @ T[G.rng[g]] @ IE.maps[g]
        f = self.phi_source.factors[1].dimension
        V = self.phi_source.lift
        inside = V.conj().T @ np.kron(GT, np.eye(f)) @ V
        lhs = self.phi @ inside @ np.linalg.inv(self.phi)
        rhs = np.zeros_like(lhs)
        for w in range(omega.point_count):
            ev = IE.evaluation(w)
            b = self.target.block(w)
            rhs[b, b] = ev @ T[omega.rho[w]] @ np.linalg.pinv(ev)
        return lhs, rhs


def phi_psi_isos(omega: EtaleCorrespondence, E: EquivariantCorrespondence) -> TensorIsos:
    G, H = omega.G, omega.H
    target = omega_crossed_product(omega, E)
    IE = induce_correspondence(omega, E)
    GE = crossed_product_correspondence(IE)
    OC = omega_crossed_product(omega, identity_correspondence_bundle(E.right))
    phi_source = tensor_product(GE, OC)
    off_ge = arrow_offsets(G, lambda u: IE.fibres[u].dimension)
    f = OC.dimension
    phi = np.zeros((target.dimension, GE.dimension * f), dtype=complex)
    for k in range(G.arrow_count):
        for w0 in omega.fibres[G.src[k]]:
            ev = IE.evaluation(w0)
            Ey = E.fibres[omega.sigma[w0]]
            kw = target.block(omega.gact(k, w0))
            for i in range(off_ge[k + 1] - off_ge[k]):
                for j, col in enumerate(range(OC.offsets[w0], OC.offsets[w0 + 1])):
                    phi[kw, (off_ge[k] + i) * f + col] = Ey.ract[j] @ ev[:, i]

    OB = omega_crossed_product(omega, identity_correspondence_bundle(E.left))
    HE = crossed_product_correspondence(E)
    psi_source = tensor_product(OB, HE)
    off_he = arrow_offsets(H, lambda u: E.fibres[u].dimension)
    f = HE.dimension
    psi = np.zeros((target.dimension, OB.dimension * f), dtype=complex)
    for w0 in range(omega.point_count):
        for l in H.arrows_to[omega.sigma[w0]]:
            El = E.fibres[H.src[l]]
            ops = np.einsum("mi,mab->iab", E.left.maps[H.inv[l]], El.lact)
            wl = target.block(omega.hact(w0, l))
            for i, row in enumerate(range(OB.offsets[w0], OB.offsets[w0 + 1])):
                for j in range(El.dimension):
                    psi[wl, row * f + off_he[l] + j] = ops[i][:, j]
    return TensorIsos(_lifted(phi, phi_source), _lifted(psi, psi_source),
                     phi_source, psi_source, target, IE)


# -- E_Omega, C*(Omega) and the K-theory map ------------------------------------------------


def e_omega(omega: EtaleCorrespondence) -> EquivariantCorrespondence:
    """Functions on Omega/H as a G-equivariant correspondence from the
    scalars over G^0 to Ind_Omega C; the left action is pullback along
    rho-bar, which on the fibre over x is scalar multiplication."""
    G = omega.G
    left = trivial_bundle(G)
    right = induce_algebra(omega, trivial_bundle(omega.H))
    fibres = {}
    for x in G.units:
        I = identity_bimodule(right.fibres[x])
        fibres[x] = HilbertBimodule(left.fibres[x], right.fibres[x], np.eye(I.dimension)[None], I.ract, I.inner)
    return EquivariantCorrespondence(left, right, fibres, right.maps)


def cstar_correspondence(omega: EtaleCorrespondence) -> HilbertBimodule:
    """C*(Omega): C*(G) -> C*(H) on functions on Omega, with
    (a.e)(w) = sum over g in G_{rho(w)} of a(g^-1) e(g.w)."""
    report = validate_correspondence(omega)
    if not report.ok:
        raise ValidationError("invalid correspondence", report)
    G, H = omega.G, omega.H
    n = omega.point_count
    lact = np.zeros((G.arrow_count, n, n))
    ract = np.zeros((H.arrow_count, n, n))
    inner = np.zeros((n, n, H.arrow_count))
    for w in range(n):
        for k in G.arrows_from[omega.rho[w]]:
            lact[k, omega.gact(k, w), w] = 1
        for h in H.arrows_to[omega.sigma[w]]:
            wh = omega.hact(w, h)
            ract[h, wh, w] = 1
            inner[w, wh, h] = 1
    return HilbertBimodule(groupoid_algebra(G), groupoid_algebra(H), lact, ract, inner)


class FactorizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class KTheoryRoutes:
    factored: K0Map
    direct: K0Map

    @property
    def agree(self) -> bool:
        return self.factored == self.direct


def k_theory_routes(omega: EtaleCorrespondence) -> KTheoryRoutes:
    """K_0(Omega ⋉ C) ∘ K_0(G ⋉ E_Omega) next to K_0(C*(Omega))."""
    crossed = crossed_product_correspondence(e_omega(omega))
    transfer = omega_crossed_product(omega, identity_correspondence_bundle(trivial_bundle(omega.H)))
    factored = k0_map(transfer) @ k0_map(crossed)
    return KTheoryRoutes(factored, k0_map(cstar_correspondence(omega)))


def k_theory_map(omega: EtaleCorrespondence) -> K0Map:
    """K_0(C*(G)) -> K_0(C*(H)). Finite correspondences are always proper,
    so the map is always defined here."""
    routes = k_theory_routes(omega)
    if not routes.agree:
        raise FactorizationError(
            f"factored map {routes.factored.tolist()} differs from {routes.direct.tolist()}"
        )
    return routes.direct


# -- composition -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompositionIsos:
    """phi_A: Ind_Omega Ind_Lambda A -> Ind_{Lambda∘Omega} A, fibre by fibre,
    with xi -> ([w, l] -> xi(w)(l))."""

    omega: EtaleCorrespondence
    lam: EtaleCorrespondence
    composite: EtaleCorrespondence
    inner_induced: InducedBundle
    iterated: InducedBundle
    direct: InducedBundle
    phi: Mapping[int, np.ndarray]

    def check_bundle_iso(self, tol: float = ATOL) -> Report:
        """phi is a G-equivariant *-isomorphism of bundles."""
        report = Report()
        G = self.omega.G
        for x in G.units:
            P = self.phi[x]
            S, T = self.iterated.fibres[x], self.direct.fibres[x]
            if P.shape != (T.dimension, S.dimension):
                report.add("fibre dimensions agree", x)
                continue
            if S.dimension == 0:
                continue
            if np.linalg.matrix_rank(P) != S.dimension:
                report.add("phi is bijective", x)
            lhs = np.einsum("kc,ijc->ijk", P, S.mult)
            rhs = np.einsum("ai,bj,abk->ijk", P, P, T.mult)
            if not _close(lhs, rhs, tol):
                report.add("phi is multiplicative", x)
            if not _close(P @ S.star, T.star @ np.conj(P), tol):
                report.add("phi preserves the involution", x)
        if not report.ok:
            return report
        for g in range(G.arrow_count):
            lhs = self.phi[G.rng[g]] @ self.iterated.maps[g]
            rhs = self.direct.maps[g] @ self.phi[G.src[g]]
            if not _close(lhs, rhs, tol):
                report.add("phi is G-equivariant", g)
        return report

    @cached_property
    def crossed_phi(self) -> np.ndarray:
        """G ⋉ phi as a matrix between the crossed products."""
        G = self.omega.G
        return _block_diag([self.phi[G.src[g]] for g in range(G.arrow_count)])

    def square(self, A: GCStarBundle) -> tuple[InteriorTensor, OmegaCrossedModule, np.ndarray]:
        """The two sides of the square (Omega ⋉ Ind A) ⊗ (Lambda ⋉ A) versus
        (Lambda∘Omega) ⋉ A pulled back along G ⋉ phi, and the map
        (w0, zeta) ⊗ (l0, a) -> ([w0, l0], zeta(l0) a) on quotient coordinates."""
        first = omega_crossed_product(self.omega, identity_correspondence_bundle(self.inner_induced))
        second = omega_crossed_product(self.lam, identity_correspondence_bundle(A))
        source = tensor_product(first, second)
        target = omega_crossed_product(self.composite, identity_correspondence_bundle(A))
        cc = composition_classes(self.omega, self.lam)
        f = second.dimension
        U = np.zeros((target.dimension, first.dimension * f), dtype=complex)
        for w0 in range(self.omega.point_count):
            for l0 in self.lam.fibres.get(self.omega.sigma[w0], ()):
                ev = self.inner_induced.evaluation(l0)
                Ay = A.fibres[self.lam.sigma[l0]]
                prod = np.einsum("mi,mjk->ijk", ev, Ay.mult)
                tb = target.block(cc.class_of(w0, l0))
                for i, row in enumerate(range(first.offsets[w0], first.offsets[w0 + 1])):
                    for j, col in enumerate(range(second.offsets[l0], second.offsets[l0 + 1])):
                        U[tb, row * f + col] = prod[i, j]
        pulled = OmegaCrossedModule(
            first.left, target.right,
            np.einsum("mi,mab->iab", self.crossed_phi, target.lact), target.ract, target.inner,
            correspondence=self.composite, coefficient=target.coefficient,
            induced=target.induced, offsets=target.offsets,
        )
        return source, pulled, U @ source.lift


def composition_isos(omega: EtaleCorrespondence, lam: EtaleCorrespondence, A: GCStarBundle) -> CompositionIsos:
    if omega.H != lam.G:
        raise ValueError("correspondences are not composable")
    composite = compose(omega, lam)
    inner_induced = induce_algebra(lam, A)
    iterated = induce_algebra(omega, inner_induced)
    direct = induce_algebra(composite, A)
    phi = {}
    cut = direct.layout.cut
    for x in omega.G.units:
        rows = []
        for c in cut.reps[x]:
            w, l = composite.labels[c]
            rows.append(inner_induced.evaluation(l) @ iterated.evaluation(w))
        phi[x] = np.vstack(rows) if rows else np.zeros((0, iterated.fibres[x].dimension), dtype=complex)
    return CompositionIsos(omega, lam, composite, inner_induced, iterated, direct, phi)


@dataclass(frozen=True)
class PointMaps:
    """Finite-set shadow of the rho-bar compatibility: theta from
    (Omega x_H Lambda)/K to Omega x_H (Lambda/K) and the anchors."""

    theta: tuple[int, ...]
    well_defined: bool
    bijective: bool
    commutes: bool


def composition_point_map(omega: EtaleCorrespondence, lam: EtaleCorrespondence) -> PointMaps:
    """theta: [[w, l]_H]_K -> [w, [l]_K]_H, checked on every representative,
    and rho-bar_Omega ∘ proj ∘ theta = rho-bar_{Lambda∘Omega}."""
    H = omega.H
    composite = compose(omega, lam)
    cc = composition_classes(omega, lam)
    lam_k = lam.right_orbits
    pairs = tuple(
        (w, c) for w in range(omega.point_count)
        for c in range(len(lam_k.classes)) if lam.rho[lam_k.classes[c][0]] == omega.sigma[w]
    )
    index = {p: i for i, p in enumerate(pairs)}

    def moves(i):
        w, c = pairs[i]
        l = lam_k.classes[c][0]
        for h in H.arrows_to[omega.sigma[w]]:
            yield index[(omega.hact(w, h), lam_k.class_of[lam.gact(H.inv[h], l)])]

    quotient = orbit_partition(len(pairs), moves)
    outer = composite.right_orbits
    theta = []
    well_defined = True
    for cls in outer.classes:
        images = set()
        for point in cls:
            for w, l in cc.members(point):
                images.add(quotient.class_of[index[(w, lam_k.class_of[l])]])
        well_defined &= len(images) == 1
        theta.append(min(images))
    bijective = well_defined and sorted(theta) == list(range(len(quotient.classes)))
    commutes = all(
        omega.rho[pairs[quotient.classes[t][0]][0]] == composite.rho[outer.classes[i][0]]
        for i, t in enumerate(theta)
    )
    return PointMaps(tuple(theta), well_defined, bijective, commutes)
