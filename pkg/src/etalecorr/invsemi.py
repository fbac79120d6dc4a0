"""Finite inverse semigroups, partial actions and transformation groupoids.

Element 0 of every semigroup is its zero. Filters on a finite semilattice
are principal, so the filter space is indexed by nonzero idempotents; the
filters themselves are still built and acted on as up-sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations, product
from typing import Any, Sequence

from .correspondence import EtaleCorrespondence
from .groupoid import UNDEFINED, FiniteGroupoid, orbit_partition, validate_groupoid
from .report import Report, ValidationError

__all__ = [
    "InverseSemigroup",
    "PartialAction",
    "Idempotents",
    "FilterSpace",
    "GermGroupoid",
    "validate_semigroup",
    "validate_partial_action",
    "idempotents",
    "filter_space",
    "transformation_groupoid",
    "germ_groupoid",
    "canonical_actions",
    "equivariant_topological_correspondence",
    "symmetric_inverse_monoid",
    "semilattice",
    "group_with_zero",
]


@dataclass(frozen=True)
class InverseSemigroup:
    element_count: int
    mul: tuple[tuple[int, ...], ...]
    star: tuple[int, ...]
    labels: tuple[Any, ...] | None = field(default=None, compare=False, repr=False)

    def __call__(self, *elements: int) -> int:
        out = elements[0]
        for e in elements[1:]:
            out = self.mul[out][e]
        return out

    @cached_property
    def idempotent_list(self) -> tuple[int, ...]:
        return tuple(e for e in range(self.element_count) if self.mul[e][e] == e)

    def source(self, s: int) -> int:
        """The idempotent s* s."""
        return self.mul[self.star[s]][s]

    def range_(self, s: int) -> int:
        return self.mul[s][self.star[s]]


def symmetric_inverse_monoid(n: int, max_rank: int | None = None) -> InverseSemigroup:
    """Partial bijections of {0..n-1} of rank at most ``max_rank``; the empty
    map is element 0. Each element is a sorted tuple of (x, s(x)) pairs."""
    max_rank = n if max_rank is None else max_rank
    elements = []
    for k in range(max_rank + 1):
        for dom in combinations(range(n), k):
            for img in permutations(range(n), k):
                elements.append(tuple(zip(dom, img)))
    index = {e: i for i, e in enumerate(elements)}

    def compose(s, t):
        smap = dict(s)
        return tuple(sorted((x, smap[y]) for x, y in t if y in smap))

    mul = tuple(tuple(index[compose(s, t)] for t in elements) for s in elements)
    star = tuple(index[tuple(sorted((y, x) for x, y in s))] for s in elements)
    return InverseSemigroup(len(elements), mul, star, tuple(elements))


def semilattice(meet: Sequence[Sequence[int]]) -> InverseSemigroup:
    n = len(meet)
    return InverseSemigroup(n, tuple(tuple(r) for r in meet), tuple(range(n)))


def group_with_zero(table: Sequence[Sequence[int]]) -> InverseSemigroup:
    """Group G with a zero adjoined; group element g becomes g + 1."""
    n = len(table) + 1
    mul = [[0] * n for _ in range(n)]
    for a, b in product(range(1, n), repeat=2):
        mul[a][b] = table[a - 1][b - 1] + 1
    identity = next(e for e in range(len(table)) if all(table[e][g] == g for g in range(len(table))))
    star = [0] + [next(h for h in range(len(table)) if table[g][h] == identity) + 1 for g in range(len(table))]
    return InverseSemigroup(n, tuple(tuple(r) for r in mul), tuple(star))


def validate_semigroup(S: InverseSemigroup) -> Report:
    report = Report()
    n = S.element_count
    if len(S.mul) != n or any(len(r) != n for r in S.mul) or len(S.star) != n:
        report.add("table sizes")
        return report
    for a, b, c in product(range(n), repeat=3):
        if S.mul[S.mul[a][b]][c] != S.mul[a][S.mul[b][c]]:
            report.add("associativity", (a, b, c))
            return report
    for s in range(n):
        if S.mul[0][s] != 0 or S.mul[s][0] != 0:
            report.add("0 is a zero", s)
        t = S.star[s]
        if S(s, t, s) != s:
            report.add("s s* s = s", s)
        if S(t, s, t) != t:
            report.add("s* s s* = s*", s)
        others = [u for u in range(n) if u != t and S(s, u, s) == s and S(u, s, u) == u]
        if others:
            report.add("adjoint is unique", (s, others[0]))
    E = S.idempotent_list
    for e, f in product(E, repeat=2):
        if S.mul[e][f] != S.mul[f][e]:
            report.add("idempotents commute", (e, f))
    return report


@dataclass(frozen=True)
class Idempotents:
    elements: tuple[int, ...]
    meet: dict[tuple[int, int], int]

    def leq(self, e: int, f: int) -> bool:
        return self.meet[(e, f)] == e


def idempotents(S: InverseSemigroup) -> Idempotents:
    E = S.idempotent_list
    return Idempotents(E, {(e, f): S.mul[e][f] for e in E for f in E})


@dataclass(frozen=True)
class FilterSpace:
    """``points[i]`` is the minimum of filter ``filters[i]``; ``U[e]`` is the
    set of filter indices containing the idempotent e."""

    points: tuple[int, ...]
    filters: tuple[frozenset[int], ...]
    U: dict[int, frozenset[int]]


def _is_filter(S: InverseSemigroup, E: Sequence[int], chi: frozenset[int]) -> bool:
    if not chi or 0 in chi:
        return False
    up_closed = all(f in chi for e in chi for f in E if S.mul[e][f] == e)
    meets = all(S.mul[e][f] in chi for e in chi for f in chi)
    return up_closed and meets


def filter_space(S: InverseSemigroup) -> FilterSpace:
    E = S.idempotent_list
    points = tuple(e for e in E if e != 0)
    filters = tuple(frozenset(f for f in E if S.mul[e][f] == e) for e in points)
    for chi in filters:
        if not _is_filter(S, E, chi):
            raise RuntimeError(f"principal up-set {sorted(chi)} is not a filter")
    U = {e: frozenset(i for i, chi in enumerate(filters) if e in chi) for e in E}
    return FilterSpace(points, filters, U)


@dataclass(frozen=True)
class PartialAction:
    """``act[s][x]`` is s.x, or -1 when x is outside dom(s)."""

    semigroup: InverseSemigroup
    point_count: int
    act: tuple[tuple[int, ...], ...]

    def dom(self, s: int) -> frozenset[int]:
        return frozenset(x for x in range(self.point_count) if self.act[s][x] != UNDEFINED)

    @classmethod
    def from_function(cls, S: InverseSemigroup, point_count: int, in_domain, fn) -> "PartialAction":
        table = tuple(
            tuple(int(fn(s, x)) if in_domain(s, x) else UNDEFINED for x in range(point_count))
            for s in range(S.element_count)
        )
        return cls(S, point_count, table)


def validate_partial_action(a: PartialAction) -> Report:
    report = Report()
    S = a.semigroup
    for s in range(S.element_count):
        dom = a.dom(s)
        image = [a.act[s][x] for x in dom]
        if len(set(image)) != len(image):
            report.add("s acts injectively", s)
        if set(image) != a.dom(S.star[s]):
            report.add("s maps dom(s) onto dom(s*)", s)
        for x in dom:
            if a.act[S.star[s]][a.act[s][x]] != x:
                report.add("s* inverts s", (s, x))
    for s, t in product(range(S.element_count), repeat=2):
        st = S.mul[s][t]
        for x in range(a.point_count):
            tx = a.act[t][x]
            composed = UNDEFINED if tx == UNDEFINED else a.act[s][tx]
            if composed != a.act[st][x]:
                report.add("(st).x = s.(t.x) as partial bijections", (s, t, x))
    return report


@dataclass(frozen=True)
class GermGroupoid:
    """Transformation groupoid together with its germ bookkeeping."""

    groupoid: FiniteGroupoid
    arrow_of: dict[tuple[int, int], int]
    unit_of: dict[int, int]

    @cached_property
    def point_of(self) -> dict[int, int]:
        return {u: x for x, u in self.unit_of.items()}


def germ_groupoid(a: PartialAction) -> GermGroupoid:
    """Germs [s, x] with (s, x) ~ (t, x) when some idempotent e below s*s
    and t*t has x in dom(e) and se = te."""
    report = validate_partial_action(a)
    if not report.ok:
        raise ValidationError("invalid partial action", report)
    S = a.semigroup
    E = S.idempotent_list
    pairs = [(x, s) for x in range(a.point_count) for s in range(S.element_count)
             if a.act[s][x] != UNDEFINED]
    index = {p: i for i, p in enumerate(pairs)}

    def moves(i):
        x, s = pairs[i]
        ss = S.source(s)
        for t in range(S.element_count):
            if a.act[t][x] == UNDEFINED:
                continue
            tt = S.source(t)
            for e in E:
                if (a.act[e][x] != UNDEFINED and S(e, ss, tt) == e
                        and S.mul[s][e] == S.mul[t][e]):
                    yield index[(x, t)]
                    break

    part = orbit_partition(len(pairs), moves)
    reps = [pairs[c[0]] for c in part.classes]
    arrow_of = {(s, x): part.class_of[index[(x, s)]] for x, s in pairs}
    unit_of = {}
    for x, s in pairs:
        if S.mul[s][s] == s:
            unit_of[x] = arrow_of[(s, x)]
    n = len(reps)
    src = [unit_of[x] for x, _ in reps]
    rng = [unit_of[a.act[s][x]] for x, s in reps]
    inv = [arrow_of[(S.star[s], a.act[s][x])] for x, s in reps]
    comp = [[UNDEFINED] * n for _ in range(n)]
    for i, (y, t) in enumerate(reps):
        for j, (x, s) in enumerate(reps):
            if a.act[s][x] == y:
                comp[i][j] = arrow_of[(S.mul[t][s], x)]
    # the germ relation must make these tables independent of representatives
    for (s, x), i in arrow_of.items():
        if rng[i] != unit_of[a.act[s][x]]:
            raise RuntimeError(f"germ range depends on representative at {(s, x)}")
    G = FiniteGroupoid.from_tables(
        [unit_of[x] for x in sorted(unit_of)], src, rng, inv, comp,
        labels=[(s, x) for x, s in reps],
    )
    return GermGroupoid(G, arrow_of, unit_of)


def transformation_groupoid(a: PartialAction) -> FiniteGroupoid:
    G = germ_groupoid(a).groupoid
    report = validate_groupoid(G)
    if not report.ok:
        raise RuntimeError(f"transformation groupoid failed validation:\n{report}")
    return G


def canonical_actions(S: InverseSemigroup) -> tuple[PartialAction, PartialAction]:
    """S on nonzero idempotents by s.e = s e s* (dom s = {e : e <= s*s}), and
    S on filters by (s.chi)(e) = chi(s* e s) with dom s = U_{s*s}.

    Point i of both actions corresponds to the i-th nonzero idempotent."""
    fs = filter_space(S)
    points = fs.points
    index = {e: i for i, e in enumerate(points)}
    on_idempotents = PartialAction.from_function(
        S, len(points),
        in_domain=lambda s, i: S.mul[points[i]][S.source(s)] == points[i],
        fn=lambda s, i: index[S(s, points[i], S.star[s])],
    )
    filter_index = {chi: i for i, chi in enumerate(fs.filters)}
    E = S.idempotent_list

    def move_filter(s, i):
        chi = fs.filters[i]
        image = frozenset(e for e in E if S(S.star[s], e, s) in chi)
        if image not in filter_index:
            raise RuntimeError(f"s.chi is not a filter for s={s}, chi={sorted(chi)}")
        return filter_index[image]

    on_filters = PartialAction.from_function(
        S, len(points),
        in_domain=lambda s, i: i in fs.U[S.source(s)],
        fn=move_filter,
    )
    return on_idempotents, on_filters


def _check_equivariant(name: str, space: PartialAction, target: PartialAction, f) -> None:
    S = space.semigroup
    for s in range(S.element_count):
        for w in range(space.point_count):
            sw = space.act[s][w]
            if sw == UNDEFINED:
                continue
            fw = target.act[s][f[w]]
            if fw == UNDEFINED or fw != f[sw]:
                raise ValidationError(f"{name} is not S-equivariant at s={s} (point {w})")


def equivariant_topological_correspondence(
    S: InverseSemigroup,
    X: PartialAction,
    Y: PartialAction,
    omega: PartialAction,
    rho: Sequence[int],
    sigma: Sequence[int],
) -> EtaleCorrespondence:
    """The bispace Omega x_{sigma, Y, r} (S ⋉ Y) from S ⋉ X to S ⋉ Y.

    Points are pairs (w, [t, y]) with sigma(w) = t.y; the left action is
    [s, x].(w, [t, y]) = (s.w, [st, y]) and the right action
    (w, [s, y]).[t, z] = (w, [st, z])."""
    for a in (X, Y, omega):
        if a.semigroup != S:
            raise ValueError("all actions must be by the same semigroup")
    _check_equivariant("rho", omega, X, rho)
    _check_equivariant("sigma", omega, Y, sigma)
    for s in range(S.element_count):
        pre = frozenset(w for w in range(omega.point_count) if rho[w] in X.dom(s))
        if pre != omega.dom(s):
            raise ValidationError(f"rho^-1(dom_X s) != dom_Omega s for s={s}")
    GX, GY = germ_groupoid(X), germ_groupoid(Y)
    Gx, Gy = GX.groupoid, GY.groupoid
    points = []
    for w in range(omega.point_count):
        u = GY.unit_of.get(sigma[w])
        if u is None:
            continue
        points.extend((w, arrow) for arrow in Gy.arrows_to[u])
    index = {p: i for i, p in enumerate(points)}
    for w, _ in points:
        if rho[w] not in GX.unit_of:
            raise ValidationError(f"rho({w}) lies outside the unit space of S ⋉ X")

    def left(g, i):
        w, arrow = points[i]
        s, _ = Gx.labels[g]
        t, y = Gy.labels[arrow]
        return index[(omega.act[s][w], GY.arrow_of[(S.mul[s][t], y)])]

    def right(i, k):
        w, arrow = points[i]
        s, _ = Gy.labels[arrow]
        t, z = Gy.labels[k]
        return index[(w, GY.arrow_of[(S.mul[s][t], z)])]

    return EtaleCorrespondence.build(
        Gx, Gy, len(points),
        rho=[GX.unit_of[rho[w]] for w, _ in points],
        sigma=[Gy.src[arrow] for _, arrow in points],
        left_fn=left, right_fn=right, labels=points,
    )
