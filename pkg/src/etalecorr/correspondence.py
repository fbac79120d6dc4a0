"""Étale correspondences between finite groupoids.

A correspondence ``G -> H`` is a finite set with a left G-action (anchor
``rho``) and a right H-action (anchor ``sigma``) that commute, the right
action being free. The right action is stored as a left action of the
opposite groupoid, so ``omega . h`` is ``right.act[h][omega]``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, NamedTuple, Sequence

from .groupoid import (
    UNDEFINED,
    FiniteGroupoid,
    GroupoidAction,
    OrbitPartition,
    action_groupoid,
    is_free,
    orbit_partition,
    orbits,
    validate_action,
)
from .report import Report, ValidationError

__all__ = [
    "EtaleCorrespondence",
    "CutoffFunction",
    "Transversal",
    "validate_correspondence",
    "identity_correspondence",
    "from_homomorphism",
    "is_homomorphism",
    "action_correspondence",
    "compose",
    "composition_classes",
    "opposite_correspondence",
    "find_bispace_isomorphism",
    "is_morita",
    "canonical_cutoff",
    "indicator_cutoff",
    "homomorphism_cutoff",
    "product_cutoff",
    "check_cutoff",
    "transversal",
]


@dataclass(frozen=True)
class EtaleCorrespondence:
    left: GroupoidAction
    right: GroupoidAction
    labels: tuple[Any, ...] | None = field(default=None, compare=False, repr=False)

    @classmethod
    def build(cls, G: FiniteGroupoid, H: FiniteGroupoid, point_count: int, rho, sigma,
              left_fn, right_fn, labels=None) -> "EtaleCorrespondence":
        """``left_fn(g, w)`` is called when src(g) = rho(w) and
        ``right_fn(w, h)`` when sigma(w) = rng(h)."""
        left = GroupoidAction.from_function(G, point_count, rho, left_fn)
        right = GroupoidAction.from_function(
            H.opposite(), point_count, sigma, lambda h, w: right_fn(w, h)
        )
        return cls(left, right, None if labels is None else tuple(labels))

    @property
    def G(self) -> FiniteGroupoid:
        return self.left.groupoid

    @cached_property
    def H(self) -> FiniteGroupoid:
        return self.right.groupoid.opposite()

    @property
    def point_count(self) -> int:
        return self.left.point_count

    @property
    def rho(self) -> tuple[int, ...]:
        return self.left.anchor

    @property
    def sigma(self) -> tuple[int, ...]:
        return self.right.anchor

    def gact(self, g: int, w: int) -> int:
        return self.left.act[g][w]

    def hact(self, w: int, h: int) -> int:
        return self.right.act[h][w]

    @cached_property
    def right_orbits(self) -> OrbitPartition:
        return orbits(self.right)

    @cached_property
    def left_orbits(self) -> OrbitPartition:
        return orbits(self.left)

    @cached_property
    def fibres(self) -> dict[int, tuple[int, ...]]:
        """``Omega^x`` for each unit x of G."""
        return self.left.fibres

    def __len__(self) -> int:
        return self.point_count


def validate_correspondence(omega: EtaleCorrespondence) -> Report:
    """Bispace axioms plus freeness of the right action. Properness and
    étaleness hold for every finite bispace and are recorded as notes."""
    report = Report()
    report.extend(validate_action(omega.left), "left action: ")
    report.extend(validate_action(omega.right), "right action: ")
    if omega.left.point_count != omega.right.point_count:
        report.add("shared point set", (omega.left.point_count, omega.right.point_count))
    if not report.ok:
        return report
    G, H = omega.G, omega.H
    for w in range(omega.point_count):
        for g in G.arrows_from[omega.rho[w]]:
            gw = omega.gact(g, w)
            if omega.sigma[gw] != omega.sigma[w]:
                report.add("sigma(g.w) = sigma(w)", (g, w))
        for h in H.arrows_to[omega.sigma[w]]:
            wh = omega.hact(w, h)
            if omega.rho[wh] != omega.rho[w]:
                report.add("rho(w.h) = rho(w)", (w, h))
    if not report.ok:
        return report
    for w in range(omega.point_count):
        for g in G.arrows_from[omega.rho[w]]:
            for h in H.arrows_to[omega.sigma[w]]:
                if omega.hact(omega.gact(g, w), h) != omega.gact(g, omega.hact(w, h)):
                    report.add("actions commute", (g, w, h))
    free = is_free(omega.right)
    if not free:
        report.add("right action free", free.witness)
    report.notes.update(
        orbit_count=len(omega.right_orbits.classes), proper=True, etale=True
    )
    return report


def _require_valid(omega: EtaleCorrespondence) -> None:
    report = validate_correspondence(omega)
    if not report.ok:
        raise ValidationError("invalid correspondence", report)


def identity_correspondence(G: FiniteGroupoid) -> EtaleCorrespondence:
    """G as a G-G bispace under left and right multiplication."""
    return EtaleCorrespondence.build(
        G, G, G.arrow_count, G.rng, G.src,
        lambda g, w: G.comp[g][w], lambda w, h: G.comp[w][h],
        labels=range(G.arrow_count),
    )


def is_homomorphism(G: FiniteGroupoid, H: FiniteGroupoid, phi: Sequence[int]) -> Report:
    report = Report()
    if len(phi) != G.arrow_count:
        report.add("phi defined on every arrow", len(phi))
        return report
    for g in range(G.arrow_count):
        if not 0 <= phi[g] < H.arrow_count:
            report.add("phi in range", g)
            return report
    for u in G.units:
        if not H.is_unit(phi[u]):
            report.add("phi preserves units", u)
    for g in range(G.arrow_count):
        if H.src[phi[g]] != phi[G.src[g]] or H.rng[phi[g]] != phi[G.rng[g]]:
            report.add("phi preserves src and rng", g)
    for g in range(G.arrow_count):
        for h in G.arrows_to[G.src[g]]:
            if phi[G.comp[g][h]] != H.comp[phi[g]][phi[h]]:
                report.add("phi preserves composition", (g, h))
    return report


def from_homomorphism(G: FiniteGroupoid, H: FiniteGroupoid, phi: Sequence[int]) -> EtaleCorrespondence:
    """``Omega_phi = G^0 x_{H^0} H`` with g.(s(g), h) = (r(g), phi(g) h) and
    right multiplication. Points are labelled (x, h)."""
    phi = tuple(int(p) for p in phi)
    report = is_homomorphism(G, H, phi)
    if not report.ok:
        raise ValidationError("not a groupoid homomorphism", report)
    points = [(x, h) for x in G.units for h in H.arrows_to[phi[x]]]
    index = {p: i for i, p in enumerate(points)}
    return EtaleCorrespondence.build(
        G, H, len(points),
        rho=[x for x, _ in points],
        sigma=[H.src[h] for _, h in points],
        left_fn=lambda g, w: index[(G.rng[g], H.comp[phi[g]][points[w][1]])],
        right_fn=lambda w, k: index[(points[w][0], H.comp[points[w][1]][k])],
        labels=points,
    )


def action_correspondence(a: GroupoidAction) -> EtaleCorrespondence:
    """``G -> G ⋉ X`` on the bispace G ⋉ X; point i is arrow i of the
    action groupoid."""
    G = a.groupoid
    GX = action_groupoid(a)
    index = {p: i for i, p in enumerate(GX.labels)}
    pairs = GX.labels
    return EtaleCorrespondence.build(
        G, GX, GX.arrow_count,
        rho=[G.rng[g] for g, _ in pairs],
        sigma=GX.src,
        left_fn=lambda k, w: index[(G.comp[k][pairs[w][0]], pairs[w][1])],
        right_fn=lambda w, q: GX.comp[w][q],
        labels=pairs,
    )


class CompositionClasses(NamedTuple):
    pairs: tuple[tuple[int, int], ...]
    pair_index: dict[tuple[int, int], int]
    partition: OrbitPartition

    def class_of(self, w: int, lam: int) -> int:
        return self.partition.class_of[self.pair_index[(w, lam)]]

    def representative(self, c: int) -> tuple[int, int]:
        return self.pairs[self.partition.classes[c][0]]

    def members(self, c: int) -> list[tuple[int, int]]:
        return [self.pairs[i] for i in self.partition.classes[c]]


def composition_classes(omega: EtaleCorrespondence, lam: EtaleCorrespondence) -> CompositionClasses:
    """Orbits of the diagonal H-action (w, l).h = (w.h, h^-1.l) on the
    fibre product of sigma and rho."""
    if omega.H != lam.G:
        raise ValueError("right groupoid of the first correspondence must be the left groupoid of the second")
    H = omega.H
    pairs = tuple(
        (w, l) for w in range(omega.point_count) for l in lam.fibres.get(omega.sigma[w], ())
    )
    pair_index = {p: i for i, p in enumerate(pairs)}

    def moves(i):
        w, l = pairs[i]
        for h in H.arrows_to[omega.sigma[w]]:
            yield pair_index[(omega.hact(w, h), lam.gact(H.inv[h], l))]

    return CompositionClasses(pairs, pair_index, orbit_partition(len(pairs), moves))


def compose(omega: EtaleCorrespondence, lam: EtaleCorrespondence) -> EtaleCorrespondence:
    """``Lambda ∘ Omega: G -> K`` on classes [w, l] labelled by their minimal pair."""
    cc = composition_classes(omega, lam)
    reps = [cc.representative(c) for c in range(len(cc.partition.classes))]
    return EtaleCorrespondence.build(
        omega.G, lam.H, len(reps),
        rho=[omega.rho[w] for w, _ in reps],
        sigma=[lam.sigma[l] for _, l in reps],
        left_fn=lambda g, c: cc.class_of(omega.gact(g, reps[c][0]), reps[c][1]),
        right_fn=lambda c, k: cc.class_of(reps[c][0], lam.hact(reps[c][1], k)),
        labels=reps,
    )


def opposite_correspondence(omega: EtaleCorrespondence) -> EtaleCorrespondence:
    """``H -> G`` with h.w = w.h^-1 and w.g = g^-1.w."""
    G, H = omega.G, omega.H
    return EtaleCorrespondence.build(
        H, G, omega.point_count, omega.sigma, omega.rho,
        left_fn=lambda h, w: omega.hact(w, H.inv[h]),
        right_fn=lambda w, g: omega.gact(G.inv[g], w),
        labels=omega.labels,
    )


def find_bispace_isomorphism(a: EtaleCorrespondence, b: EtaleCorrespondence) -> tuple[int, ...] | None:
    """Point bijection commuting with anchors and both actions, or None.

    A choice on one point fixes the map on its whole G-H orbit, so the
    search branches once per orbit."""
    if a.G != b.G or a.H != b.H or a.point_count != b.point_count:
        return None
    G, H = a.G, a.H
    n = a.point_count
    image = [UNDEFINED] * n
    used = [False] * n

    def neighbours(omega, w):
        for g in G.arrows_from[omega.rho[w]]:
            yield ("g", g), omega.gact(g, w)
        for h in H.arrows_to[omega.sigma[w]]:
            yield ("h", h), omega.hact(w, h)

    def extend(w0: int, c0: int) -> list[int] | None:
        assigned = []
        queue = deque([(w0, c0)])
        while queue:
            w, c = queue.popleft()
            if image[w] != UNDEFINED:
                if image[w] != c:
                    return _undo(assigned)
                continue
            if used[c] or a.rho[w] != b.rho[c] or a.sigma[w] != b.sigma[c]:
                return _undo(assigned)
            image[w], used[c] = c, True
            assigned.append(w)
            for (kind, arrow), w2 in neighbours(a, w):
                c2 = b.gact(arrow, c) if kind == "g" else b.hact(c, arrow)
                queue.append((w2, c2))
        return assigned

    def _undo(assigned):
        for w in assigned:
            used[image[w]] = False
            image[w] = UNDEFINED
        return None

    def search() -> bool:
        try:
            w0 = image.index(UNDEFINED)
        except ValueError:
            return True
        for c0 in range(n):
            if used[c0]:
                continue
            assigned = extend(w0, c0)
            if assigned is None:
                continue
            if search():
                return True
            _undo(assigned)
        return False

    return tuple(image) if search() else None


class MoritaResult(NamedTuple):
    morita: bool
    reason: str
    witness: EtaleCorrespondence | None = None

    def __bool__(self) -> bool:
        return self.morita


def is_morita(omega: EtaleCorrespondence) -> MoritaResult:
    """Both actions free and both quotient anchor maps bijective; the witness
    is the opposite bispace."""
    left_free = is_free(omega.left)
    if not left_free:
        return MoritaResult(False, f"left action not free at {left_free.witness}")
    right_free = is_free(omega.right)
    if not right_free:
        return MoritaResult(False, f"right action not free at {right_free.witness}")
    for name, part, anchor, units in (
        ("rho-bar: Omega/H -> G^0", omega.right_orbits, omega.rho, omega.G.units),
        ("sigma-bar: G\\Omega -> H^0", omega.left_orbits, omega.sigma, omega.H.units),
    ):
        image = [anchor[rep] for rep in part.representatives]
        if len(set(image)) != len(image):
            return MoritaResult(False, f"{name} is not injective")
        if set(image) != set(units):
            return MoritaResult(False, f"{name} is not surjective")
    return MoritaResult(True, "both actions free and both anchor quotients bijective",
                        opposite_correspondence(omega))


# -- cutoff functions -------------------------------------------------------


@dataclass(frozen=True)
class CutoffFunction:
    values: tuple[Fraction, ...]

    def __getitem__(self, w: int) -> Fraction:
        return self.values[w]

    def __len__(self) -> int:
        return len(self.values)


def check_cutoff(omega: EtaleCorrespondence, c: CutoffFunction) -> Report:
    """Exact check that c >= 0 and the translates along each right fibre sum to 1."""
    report = Report()
    if len(c) != omega.point_count:
        report.add("one value per point", len(c))
        return report
    for w in range(omega.point_count):
        if c[w] < 0:
            report.add("nonnegative", w)
        total = sum((c[omega.hact(w, h)] for h in omega.H.arrows_to[omega.sigma[w]]), Fraction(0))
        if total != 1:
            report.add("sum over H^sigma(w) of c(w.h) = 1", (w, total))
    return report


def canonical_cutoff(omega: EtaleCorrespondence) -> CutoffFunction:
    """c(w) = 1/|w.H|."""
    part = omega.right_orbits
    return CutoffFunction(
        tuple(Fraction(1, len(part.classes[part.class_of[w]])) for w in range(omega.point_count))
    )


def homomorphism_cutoff(omega: EtaleCorrespondence) -> CutoffFunction:
    """Indicator of the points (x, h) with h a unit, for a bispace built by
    :func:`from_homomorphism`."""
    H = omega.H
    if omega.labels is None or not all(
        isinstance(p, tuple) and len(p) == 2 and omega.rho[w] == p[0] and 0 <= p[1] < H.arrow_count
        and omega.sigma[w] == H.src[p[1]] and omega.hact(w, H.src[p[1]]) == w
        for w, p in enumerate(omega.labels)
    ):
        raise ValueError("expected a bispace built from a homomorphism")
    return CutoffFunction(tuple(Fraction(int(H.is_unit(h))) for _, h in omega.labels))


def product_cutoff(omega: EtaleCorrespondence, lam: EtaleCorrespondence,
                   c_omega: CutoffFunction, c_lam: CutoffFunction) -> CutoffFunction:
    """Cutoff on compose(omega, lam):
    c[w, l] = sum over h in H^sigma(w) of c_omega(w.h) c_lam(h^-1.l).

    Every representative of every class is evaluated; disagreement raises."""
    H = omega.H
    cc = composition_classes(omega, lam)
    values = []
    for c in range(len(cc.partition.classes)):
        seen = set()
        for w, l in cc.members(c):
            seen.add(sum(
                (c_omega[omega.hact(w, h)] * c_lam[lam.gact(H.inv[h], l)]
                 for h in H.arrows_to[omega.sigma[w]]),
                Fraction(0),
            ))
        if len(seen) != 1:
            raise RuntimeError(f"product cutoff depends on the representative of class {c}: {seen}")
        values.append(seen.pop())
    return CutoffFunction(tuple(values))


# -- transversals ------------------------------------------------------------


@dataclass(frozen=True)
class Transversal:
    """One representative per H-orbit, grouped by the unit ``rho`` lands on.

    ``position[w]`` is the index of w's orbit inside ``reps[rho(w)]`` and
    ``offset_arrow[w]`` the unique h with ``w = rep . h``."""

    reps: dict[int, tuple[int, ...]]
    position: tuple[int, ...]
    offset_arrow: tuple[int, ...]

    def rep_of(self, omega: EtaleCorrespondence, w: int) -> int:
        return self.reps[omega.rho[w]][self.position[w]]


def transversal(omega: EtaleCorrespondence) -> Transversal:
    part = omega.right_orbits
    H = omega.H
    reps: dict[int, list[int]] = {x: [] for x in omega.G.units}
    position = [0] * omega.point_count
    offset = [UNDEFINED] * omega.point_count
    for cls in part.classes:
        rep = cls[0]
        x = omega.rho[rep]
        pos = len(reps[x])
        reps[x].append(rep)
        for h in H.arrows_to[omega.sigma[rep]]:
            w = omega.hact(rep, h)
            if offset[w] != UNDEFINED:
                raise ValidationError(f"right action is not free at point {w}")
            position[w], offset[w] = pos, h
    return Transversal({x: tuple(v) for x, v in reps.items()}, tuple(position), tuple(offset))


def indicator_cutoff(omega: EtaleCorrespondence) -> CutoffFunction:
    """Indicator of one chosen representative per H-orbit; valid because
    the right action is free."""
    reps = set(omega.right_orbits.representatives)
    return CutoffFunction(tuple(Fraction(int(w in reps)) for w in range(omega.point_count)))
