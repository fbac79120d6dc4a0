"""Equivariant C*-bundles and Hilbert-module bundles over finite groupoids.

A bundle stores one fibre algebra per unit (keyed by the unit's arrow id)
and one matrix per arrow: ``maps[g]`` sends coefficient vectors in the
fibre over ``src(g)`` to the fibre over ``rng(g)``. Crossed products are
built on the basis of pairs (g, basis element of the fibre over src(g)),
with blocks laid out in arrow order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .cstar import (
    ATOL,
    FinDimCStarAlgebra,
    HilbertBimodule,
    InteriorTensor,
    _close,
    _frozen,
    complex_numbers,
    direct_sum,
    identity_bimodule,
    matrix_algebra,
    tensor_product,
    validate_algebra,
    validate_bimodule,
)
from .groupoid import FiniteGroupoid, GroupoidAction
from .report import Report, ValidationError

__all__ = [
    "GCStarBundle",
    "GHilbertBundle",
    "EquivariantCorrespondence",
    "validate_bundle",
    "validate_hilbert_bundle",
    "validate_equivariant_correspondence",
    "trivial_bundle",
    "function_bundle",
    "endomorphism_bundle",
    "direct_sum_bundle",
    "identity_correspondence_bundle",
    "span_correspondence",
    "column_bundle",
    "row_bundle",
    "tensor_correspondence",
    "direct_sum_bimodule",
    "crossed_product_algebra",
    "crossed_product_module",
    "crossed_product_correspondence",
    "arrow_offsets",
]


def _freeze_maps(maps) -> tuple[np.ndarray, ...]:
    return tuple(_frozen(m) for m in maps)


def _maps_equal(a, b) -> bool:
    return len(a) == len(b) and all(x.shape == y.shape and np.array_equal(x, y) for x, y in zip(a, b))


@dataclass(frozen=True, eq=False)
class GCStarBundle:
    groupoid: FiniteGroupoid
    fibres: Mapping[int, FinDimCStarAlgebra]
    maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "fibres", dict(self.fibres))
        object.__setattr__(self, "maps", _freeze_maps(self.maps))

    def fibre_over(self, g: int) -> FinDimCStarAlgebra:
        """The fibre at the source of arrow g."""
        return self.fibres[self.groupoid.src[g]]

    def act(self, g: int, a) -> np.ndarray:
        return self.maps[g] @ a

    def __eq__(self, other) -> bool:
        if not isinstance(other, GCStarBundle):
            return NotImplemented
        return (self.groupoid == other.groupoid and self.fibres == other.fibres
                and _maps_equal(self.maps, other.maps))

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class GHilbertBundle:
    """Right Hilbert modules over the fibres of ``coefficients``. Each fibre
    is a bimodule whose left algebra is the scalars."""

    coefficients: GCStarBundle
    fibres: Mapping[int, HilbertBimodule]
    maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "fibres", dict(self.fibres))
        object.__setattr__(self, "maps", _freeze_maps(self.maps))

    @property
    def groupoid(self) -> FiniteGroupoid:
        return self.coefficients.groupoid

    def __eq__(self, other) -> bool:
        if not isinstance(other, GHilbertBundle):
            return NotImplemented
        return (self.coefficients == other.coefficients and self.fibres == other.fibres
                and _maps_equal(self.maps, other.maps))

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class EquivariantCorrespondence:
    left: GCStarBundle
    right: GCStarBundle
    fibres: Mapping[int, HilbertBimodule]
    maps: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "fibres", dict(self.fibres))
        object.__setattr__(self, "maps", _freeze_maps(self.maps))

    @property
    def groupoid(self) -> FiniteGroupoid:
        return self.left.groupoid

    @cached_property
    def module(self) -> GHilbertBundle:
        """The underlying right Hilbert-module bundle."""
        C = complex_numbers()
        fibres = {
            x: HilbertBimodule(C, E.right, np.eye(E.dimension)[None], E.ract, E.inner)
            for x, E in self.fibres.items()
        }
        return GHilbertBundle(self.right, fibres, self.maps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EquivariantCorrespondence):
            return NotImplemented
        return (self.left == other.left and self.right == other.right
                and self.fibres == other.fibres and _maps_equal(self.maps, other.maps))

    __hash__ = object.__hash__


# -- validation -----------------------------------------------------------------


def _check_arrow_maps(G: FiniteGroupoid, maps, dim_of, report: Report, tol: float) -> bool:
    """Shapes, identities at units and the cocycle law. Returns False when
    shapes are wrong and later checks would be meaningless."""
    if len(maps) != G.arrow_count:
        report.add("one map per arrow", len(maps))
        return False
    for g, m in enumerate(maps):
        if m.shape != (dim_of(G.rng[g]), dim_of(G.src[g])):
            report.add("map shapes match fibres", g)
            return False
    for u in G.units:
        if not _close(maps[u], np.eye(dim_of(u)), tol):
            report.add("units act as the identity", u)
    for g in range(G.arrow_count):
        for h in G.arrows_to[G.src[g]]:
            if not _close(maps[g] @ maps[h], maps[G.comp[g][h]], tol):
                report.add("map(g) map(h) = map(gh)", (g, h))
    return True


def validate_bundle(A: GCStarBundle, tol: float = ATOL) -> Report:
    """Fibre axioms, cocycle law, and that each arrow acts by a
    trace-preserving unital *-isomorphism."""
    report = Report()
    G = A.groupoid
    missing = [u for u in G.units if u not in A.fibres]
    if missing:
        report.add("a fibre over every unit", missing)
        return report
    for u in G.units:
        report.extend(validate_algebra(A.fibres[u], tol), f"fibre {u}: ")
    if not report.ok or not _check_arrow_maps(G, A.maps, lambda u: A.fibres[u].dimension, report, tol):
        return report
    for g, a in enumerate(A.maps):
        S, R = A.fibres[G.src[g]], A.fibres[G.rng[g]]
        if S.dimension == 0:
            continue
        lhs = np.einsum("kc,ijc->ijk", a, S.mult)
        rhs = np.einsum("ai,bj,abk->ijk", a, a, R.mult)
        if not _close(lhs, rhs, tol):
            report.add("arrows act multiplicatively", g)
        if not _close(a @ S.star, R.star @ np.conj(a), tol):
            report.add("arrows commute with the involution", g)
        if not _close(a @ S.unit, R.unit, tol):
            report.add("arrows preserve the unit", g)
        if not _close(R.trace @ a, S.trace, tol):
            report.add("fibre traces are invariant", g)
    return report


def _validate_fibred_module(G, right: GCStarBundle, fibres, maps, left: GCStarBundle | None,
                            tol: float, samples: int) -> Report:
    report = Report()
    missing = [u for u in G.units if u not in fibres]
    if missing:
        report.add("a fibre over every unit", missing)
        return report
    for u in G.units:
        E = fibres[u]
        if E.right != right.fibres[u]:
            report.add("fibre module over the fibre algebra", u)
        if left is not None and E.left != left.fibres[u]:
            report.add("fibre left algebra matches the left bundle", u)
        report.extend(validate_bimodule(E, tol, samples=samples, require_unital=left is not None),
                      f"fibre {u}: ")
    if not report.ok or not _check_arrow_maps(G, maps, lambda u: fibres[u].dimension, report, tol):
        return report
    for g, ug in enumerate(maps):
        s, r = G.src[g], G.rng[g]
        Es, Er = fibres[s], fibres[r]
        if Es.dimension == 0:
            continue
        alpha = right.maps[g]
        moved = np.einsum("kj,kab->jab", alpha, Er.ract)
        if not _close(ug @ Es.ract, moved @ ug, tol):
            report.add("g.(e b) = (g.e)(g.b)", g)
        lhs = np.einsum("ap,bq,abk->pqk", np.conj(ug), ug, Er.inner)
        rhs = np.einsum("kc,pqc->pqk", alpha, Es.inner)
        if not _close(lhs, rhs, tol):
            report.add("<g.e, g.f> = g.<e, f>", g)
        if left is not None:
            moved = np.einsum("ki,kab->iab", left.maps[g], Er.lact)
            if not _close(ug @ Es.lact, moved @ ug, tol):
                report.add("g.(a e) = (g.a)(g.e)", g)
    return report


def validate_hilbert_bundle(E: GHilbertBundle, tol: float = ATOL, samples: int = 50) -> Report:
    report = Report()
    report.extend(validate_bundle(E.coefficients, tol), "coefficients: ")
    if report.ok:
        report.extend(_validate_fibred_module(E.groupoid, E.coefficients, E.fibres, E.maps,
                                              None, tol, samples))
    return report


def validate_equivariant_correspondence(E: EquivariantCorrespondence, tol: float = ATOL,
                                        samples: int = 50) -> Report:
    report = Report()
    if E.left.groupoid != E.right.groupoid:
        report.add("left and right bundles share a groupoid")
        return report
    report.extend(validate_bundle(E.left, tol), "left: ")
    report.extend(validate_bundle(E.right, tol), "right: ")
    if report.ok:
        report.extend(_validate_fibred_module(E.groupoid, E.right, E.fibres, E.maps,
                                              E.left, tol, samples))
    return report


def _require(report: Report, what: str) -> None:
    if not report.ok:
        raise ValidationError(f"invalid {what}", report)


# -- bundle constructors ----------------------------------------------------------


def trivial_bundle(G: FiniteGroupoid) -> GCStarBundle:
    """The scalars over every unit with trivial action."""
    C = complex_numbers()
    return GCStarBundle(G, {u: C for u in G.units}, [np.ones((1, 1))] * G.arrow_count)


def _point_permutation(a: GroupoidAction, g: int) -> np.ndarray:
    """Matrix sending the basis vector of point y over src(g) to that of g.y."""
    G = a.groupoid
    src, dst = a.fibres[G.src[g]], a.fibres[G.rng[g]]
    where = {y: i for i, y in enumerate(dst)}
    P = np.zeros((len(dst), len(src)))
    for i, y in enumerate(src):
        P[where[a.act[g][y]], i] = 1
    return P


def _function_algebra(n: int) -> FinDimCStarAlgebra:
    mult = np.zeros((n, n, n))
    for i in range(n):
        mult[i, i, i] = 1
    return FinDimCStarAlgebra(mult, np.eye(n), np.ones(n), np.ones(n))


def function_bundle(a: GroupoidAction) -> GCStarBundle:
    """Functions on the fibres of a G-set, with (g.f)(y) = f(g^-1 y)."""
    G = a.groupoid
    fibres = {u: _function_algebra(len(a.fibres[u])) for u in G.units}
    return GCStarBundle(G, fibres, [_point_permutation(a, g) for g in range(G.arrow_count)])


def _conjugation(P: np.ndarray) -> np.ndarray:
    """Ad(P) on matrix units: E_ab -> P E_ab P^T for a permutation P."""
    return np.kron(P, P)


def endomorphism_bundle(a: GroupoidAction) -> GCStarBundle:
    """End(C^{X_x}) over each unit, acted on by conjugation with the point
    permutations."""
    G = a.groupoid
    fibres = {u: matrix_algebra(len(a.fibres[u])) for u in G.units}
    return GCStarBundle(
        G, fibres, [_conjugation(_point_permutation(a, g)) for g in range(G.arrow_count)]
    )


def _block_diag(mats) -> np.ndarray:
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def direct_sum_bundle(*bundles: GCStarBundle) -> GCStarBundle:
    G = bundles[0].groupoid
    if any(B.groupoid != G for B in bundles):
        raise ValueError("bundles live over different groupoids")
    fibres = {u: direct_sum([B.fibres[u] for B in bundles]) for u in G.units}
    maps = [_block_diag([B.maps[g] for B in bundles]) for g in range(G.arrow_count)]
    return GCStarBundle(G, fibres, maps)


def direct_sum_bimodule(modules: Sequence[HilbertBimodule], left: FinDimCStarAlgebra | None = None,
                        right: FinDimCStarAlgebra | None = None) -> HilbertBimodule:
    """Block sum of bimodules between the same pair of algebras."""
    left = left or modules[0].left
    right = right or modules[0].right
    dims = [E.dimension for E in modules]
    n = sum(dims)
    lact = np.zeros((left.dimension, n, n), dtype=complex)
    ract = np.zeros((right.dimension, n, n), dtype=complex)
    inner = np.zeros((n, n, right.dimension), dtype=complex)
    off = 0
    for E, d in zip(modules, dims):
        s = slice(off, off + d)
        lact[:, s, s] = E.lact
        ract[:, s, s] = E.ract
        inner[s, s, :] = E.inner
        off += d
    return HilbertBimodule(left, right, lact, ract, inner)


# -- equivariant correspondences ----------------------------------------------------


def identity_correspondence_bundle(A: GCStarBundle) -> EquivariantCorrespondence:
    return EquivariantCorrespondence(
        A, A, {u: identity_bimodule(A.fibres[u]) for u in A.groupoid.units}, A.maps
    )


def span_correspondence(Y: GroupoidAction, Z: GroupoidAction, W: GroupoidAction,
                        f: Sequence[int], k: Sequence[int]) -> EquivariantCorrespondence:
    """Functions on W as a correspondence C(Y) -> C(Z) along equivariant maps
    f: W -> Y and k: W -> Z; (a.xi.b)(w) = a(f(w)) xi(w) b(k(w))."""
    G = W.groupoid
    for name, target, fn in (("f", Y, f), ("k", Z, k)):
        for w in range(W.point_count):
            if target.anchor[fn[w]] != W.anchor[w]:
                raise ValidationError(f"{name} does not preserve anchors at point {w}")
            for g in G.arrows_from[W.anchor[w]]:
                if fn[W.act[g][w]] != target.act[g][fn[w]]:
                    raise ValidationError(f"{name} is not equivariant at {(g, w)}")
    A, B = function_bundle(Y), function_bundle(Z)
    fibres = {}
    for u in G.units:
        ws = W.fibres[u]
        ys = {y: i for i, y in enumerate(Y.fibres[u])}
        zs = {z: i for i, z in enumerate(Z.fibres[u])}
        n = len(ws)
        lact = np.zeros((len(ys), n, n))
        ract = np.zeros((len(zs), n, n))
        inner = np.zeros((n, n, len(zs)))
        for p, w in enumerate(ws):
            lact[ys[f[w]], p, p] = 1
            ract[zs[k[w]], p, p] = 1
            inner[p, p, zs[k[w]]] = 1
        fibres[u] = HilbertBimodule(A.fibres[u], B.fibres[u], lact, ract, inner)
    maps = [_point_permutation(W, g) for g in range(G.arrow_count)]
    return EquivariantCorrespondence(A, B, fibres, maps)


def column_bundle(a: GroupoidAction) -> EquivariantCorrespondence:
    """C^{X_x} as a correspondence End(C^{X_x}) -> C over each unit."""
    G = a.groupoid
    A, B = endomorphism_bundle(a), trivial_bundle(G)
    fibres = {}
    for u in G.units:
        n = len(a.fibres[u])
        lact = np.zeros((n * n, n, n))
        for i in range(n):
            for j in range(n):
                lact[i * n + j, i, j] = 1
        fibres[u] = HilbertBimodule(A.fibres[u], B.fibres[u], lact, np.eye(n)[None], np.eye(n)[:, :, None])
    return EquivariantCorrespondence(A, B, fibres, [_point_permutation(a, g) for g in range(G.arrow_count)])


def row_bundle(a: GroupoidAction) -> EquivariantCorrespondence:
    """C^{X_x} as row vectors, a correspondence C -> End(C^{X_x})."""
    G = a.groupoid
    A, B = trivial_bundle(G), endomorphism_bundle(a)
    fibres = {}
    for u in G.units:
        n = len(a.fibres[u])
        ract = np.zeros((n * n, n, n))
        inner = np.zeros((n, n, n * n))
        for i in range(n):
            for j in range(n):
                ract[i * n + j, j, i] = 1
                inner[i, j, i * n + j] = 1
        fibres[u] = HilbertBimodule(A.fibres[u], B.fibres[u], np.eye(n)[None], ract, inner)
    return EquivariantCorrespondence(A, B, fibres, [_point_permutation(a, g) for g in range(G.arrow_count)])


def tensor_correspondence(E: EquivariantCorrespondence, F: EquivariantCorrespondence) -> EquivariantCorrespondence:
    """Fibrewise interior tensor product; arrows act by u_E ⊗ u_F on the
    quotient of the algebraic tensor product."""
    if E.right != F.left:
        raise ValueError("middle bundles differ")
    G = E.groupoid
    fibres: dict[int, InteriorTensor] = {u: tensor_product(E.fibres[u], F.fibres[u]) for u in G.units}
    maps = []
    for g in range(G.arrow_count):
        Vs, Vr = fibres[G.src[g]].lift, fibres[G.rng[g]].lift
        maps.append(Vr.conj().T @ np.kron(E.maps[g], F.maps[g]) @ Vs)
    return EquivariantCorrespondence(E.left, F.right, fibres, maps)


# -- crossed products ---------------------------------------------------------------


def arrow_offsets(G: FiniteGroupoid, dim_at_unit) -> np.ndarray:
    """Start of the block of each arrow when arrow g carries a copy of the
    fibre over src(g); the last entry is the total dimension."""
    dims = [dim_at_unit(G.src[g]) for g in range(G.arrow_count)]
    return np.concatenate([[0], np.cumsum(dims)]).astype(int)


def crossed_product_algebra(A: GCStarBundle) -> FinDimCStarAlgebra:
    """Convolution algebra of sections with
    (a*b)(g) = sum over h in G^{s(g)} of (h.a(gh)) b(h^-1) and
    a*(g) = g^-1.(a(g^-1))*. On basis elements this reads
    (k, x)(l, y) = (kl, (l^-1.x) y) and (k, x)* = (k^-1, k.x*)."""
    _require(validate_bundle(A), "bundle")
    G = A.groupoid
    off = arrow_offsets(G, lambda u: A.fibres[u].dimension)
    d = int(off[-1])
    mult = np.zeros((d, d, d), dtype=complex)
    star = np.zeros((d, d), dtype=complex)
    trace = np.zeros(d, dtype=complex)
    unit = np.zeros(d, dtype=complex)

    def block(g):
        return slice(off[g], off[g + 1])

    for k in range(G.arrow_count):
        fk = A.fibres[G.src[k]]
        ki = G.inv[k]
        star[block(ki), block(k)] = A.maps[k] @ fk.star
        for l in G.arrows_to[G.src[k]]:
            fl = A.fibres[G.src[l]]
            kl = G.comp[k][l]
            mult[block(k), block(l), block(kl)] = np.einsum("pi,pjk->ijk", A.maps[G.inv[l]], fl.mult)
    for u in G.units:
        trace[block(u)] = A.fibres[u].trace
        unit[block(u)] = A.fibres[u].unit
    return FinDimCStarAlgebra(mult, star, trace, unit)


def _crossed_right_structure(G, B: GCStarBundle, fibres, maps):
    """Right action and inner product of the crossed-product module:
    (k, e)(l, b) = (kl, (l^-1.e) b) and
    <(k, e), (l, f)> = (k^-1 l, <(l^-1 k).e, f>)."""
    off_b = arrow_offsets(G, lambda u: B.fibres[u].dimension)
    off_e = arrow_offsets(G, lambda u: fibres[u].dimension)
    n, db = int(off_e[-1]), int(off_b[-1])
    ract = np.zeros((db, n, n), dtype=complex)
    inner = np.zeros((n, n, db), dtype=complex)

    def eb(g):
        return slice(off_e[g], off_e[g + 1])

    for l in range(G.arrow_count):
        Fs = fibres[G.src[l]]
        u_back = maps[G.inv[l]]
        for j in range(B.fibres[G.src[l]].dimension):
            op = Fs.ract[j] @ u_back
            for k in G.arrows_from[G.rng[l]]:
                ract[off_b[l] + j, eb(G.comp[k][l]), eb(k)] = op
    for k in range(G.arrow_count):
        for l in G.arrows_to[G.rng[k]]:
            g = G.comp[G.inv[k]][l]
            U = maps[G.comp[G.inv[l]][k]]
            inner[eb(k), eb(l), off_b[g]:off_b[g + 1]] = np.einsum(
                "ap,aqc->pqc", np.conj(U), fibres[G.src[l]].inner
            )
    return off_e, ract, inner


def crossed_product_module(E: GHilbertBundle) -> HilbertBimodule:
    """G ⋉ E as a right Hilbert module over G ⋉ A; the left algebra is the
    scalars."""
    _require(validate_hilbert_bundle(E, samples=0), "Hilbert bundle")
    G = E.groupoid
    off, ract, inner = _crossed_right_structure(G, E.coefficients, E.fibres, E.maps)
    n = int(off[-1])
    return HilbertBimodule(complex_numbers(), crossed_product_algebra(E.coefficients),
                           np.eye(n)[None], ract, inner)


def crossed_product_correspondence(E: EquivariantCorrespondence) -> HilbertBimodule:
    """G ⋉ E: G ⋉ A -> G ⋉ B with left action (k, a)(l, e) = (kl, (l^-1.a) e).

    Properness is automatic for finite groupoids, so the result is always a
    correspondence with compact left action."""
    _require(validate_equivariant_correspondence(E, samples=0), "equivariant correspondence")
    G = E.groupoid
    off, ract, inner = _crossed_right_structure(G, E.right, E.fibres, E.maps)
    off_a = arrow_offsets(G, lambda u: E.left.fibres[u].dimension)
    n, da = int(off[-1]), int(off_a[-1])
    lact = np.zeros((da, n, n), dtype=complex)
    for l in range(G.arrow_count):
        Fs = E.fibres[G.src[l]]
        alpha = E.left.maps[G.inv[l]]
        ops = np.einsum("mi,mab->iab", alpha, Fs.lact)
        for k in G.arrows_from[G.rng[l]]:
            kl = G.comp[k][l]
            for i in range(E.left.fibres[G.src[k]].dimension):
                lact[off_a[k] + i, off[kl]:off[kl + 1], off[l]:off[l + 1]] = ops[i]
    return HilbertBimodule(crossed_product_algebra(E.left), crossed_product_algebra(E.right),
                           lact, ract, inner)
