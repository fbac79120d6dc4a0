"""Finite groupoids, their actions on finite sets and action groupoids.

Arrows and points are dense integer indices. Composition follows the
convention ``comp(g, h) = g h`` which is defined exactly when
``src(g) == rng(h)``; undefined entries of the composition table hold -1.
Unit arrows double as the objects of the groupoid, so ``src`` and ``rng``
return arrow indices of units.

Every finite space is discrete, so properness, étaleness and Hausdorffness
hold vacuously and are not modelled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Any, NamedTuple, Sequence

from .report import Report, ValidationError

__all__ = [
    "FiniteGroupoid",
    "GroupoidAction",
    "OrbitPartition",
    "FreenessResult",
    "validate_groupoid",
    "validate_action",
    "action_groupoid",
    "orbits",
    "is_free",
    "isotropy",
    "find_groupoid_isomorphism",
    "disjoint_union",
    "product_groupoid",
    "unit_action",
    "translation_action",
    "orbit_partition",
]

UNDEFINED = -1


@dataclass(frozen=True)
class FiniteGroupoid:
    arrow_count: int
    units: tuple[int, ...]
    src: tuple[int, ...]
    rng: tuple[int, ...]
    inv: tuple[int, ...]
    comp: tuple[tuple[int, ...], ...]
    labels: tuple[Any, ...] | None = field(default=None, compare=False, repr=False)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_tables(cls, units, src, rng, inv, comp, labels=None) -> "FiniteGroupoid":
        comp = tuple(tuple(UNDEFINED if c is None else int(c) for c in row) for row in comp)
        return cls(
            arrow_count=len(src),
            units=tuple(int(u) for u in units),
            src=tuple(int(s) for s in src),
            rng=tuple(int(r) for r in rng),
            inv=tuple(int(i) for i in inv),
            comp=comp,
            labels=None if labels is None else tuple(labels),
        )

    @classmethod
    def from_composition(cls, arrows: Sequence[Any], units: Sequence[Any], src, rng, mul) -> "FiniteGroupoid":
        """Build from labelled arrows, label-valued ``src``/``rng`` and a product
        ``mul(g, h)`` that is only called on composable pairs."""
        arrows = list(arrows)
        index = {a: i for i, a in enumerate(arrows)}
        n = len(arrows)
        unit_ids = [index[u] for u in units]
        s = [index[src(a)] for a in arrows]
        r = [index[rng(a)] for a in arrows]
        comp = [[UNDEFINED] * n for _ in range(n)]
        for i, j in product(range(n), repeat=2):
            if s[i] == r[j]:
                comp[i][j] = index[mul(arrows[i], arrows[j])]
        inv = []
        for i in range(n):
            matches = [j for j in range(n) if comp[i][j] == r[i] and comp[j][i] == s[i]]
            if not matches:
                raise ValidationError(f"arrow {arrows[i]!r} has no inverse")
            inv.append(matches[0])
        return cls.from_tables(unit_ids, s, r, inv, comp, labels=arrows)

    @classmethod
    def point(cls) -> "FiniteGroupoid":
        return cls.from_tables([0], [0], [0], [0], [[0]], labels=["pt"])

    @classmethod
    def group(cls, table: Sequence[Sequence[int]], labels=None) -> "FiniteGroupoid":
        """One-unit groupoid from a group multiplication table."""
        n = len(table)
        identity = next(e for e in range(n) if all(table[e][g] == g for g in range(n)))
        inv = [next(h for h in range(n) if table[g][h] == identity) for g in range(n)]
        return cls.from_tables(
            [identity], [identity] * n, [identity] * n, inv, [list(row) for row in table], labels
        )

    @classmethod
    def pair(cls, n: int) -> "FiniteGroupoid":
        """Pair groupoid on n objects; arrow (i, j) goes from j to i."""
        arrows = [(i, j) for i in range(n) for j in range(n)]
        return cls.from_composition(
            arrows,
            [(i, i) for i in range(n)],
            src=lambda a: (a[1], a[1]),
            rng=lambda a: (a[0], a[0]),
            mul=lambda a, b: (a[0], b[1]),
        )

    @classmethod
    def unit_space(cls, n: int) -> "FiniteGroupoid":
        """The groupoid with n objects and only identity arrows."""
        comp = [[i if i == j else UNDEFINED for j in range(n)] for i in range(n)]
        return cls.from_tables(range(n), range(n), range(n), range(n), comp)

    # -- structure ----------------------------------------------------

    @cached_property
    def unit_index(self) -> dict[int, int]:
        return {u: i for i, u in enumerate(self.units)}

    @cached_property
    def unit_set(self) -> frozenset[int]:
        return frozenset(self.units)

    @cached_property
    def arrows_to(self) -> dict[int, tuple[int, ...]]:
        """``G^x``: arrows with range x."""
        out: dict[int, list[int]] = {u: [] for u in self.units}
        for g in range(self.arrow_count):
            out.setdefault(self.rng[g], []).append(g)
        return {u: tuple(v) for u, v in out.items()}

    @cached_property
    def arrows_from(self) -> dict[int, tuple[int, ...]]:
        """``G_x``: arrows with source x."""
        out: dict[int, list[int]] = {u: [] for u in self.units}
        for g in range(self.arrow_count):
            out.setdefault(self.src[g], []).append(g)
        return {u: tuple(v) for u, v in out.items()}

    def mul(self, g: int, h: int) -> int:
        c = self.comp[g][h]
        if c == UNDEFINED:
            raise ValueError(f"arrows {g} and {h} are not composable")
        return c

    def is_unit(self, g: int) -> bool:
        return g in self.unit_set

    def opposite(self) -> "FiniteGroupoid":
        n = self.arrow_count
        comp = tuple(tuple(self.comp[h][g] for h in range(n)) for g in range(n))
        return FiniteGroupoid(n, self.units, self.rng, self.src, self.inv, comp, self.labels)

    def components(self) -> list[tuple[int, ...]]:
        """Connected components as tuples of units."""
        return [tuple(c) for c in orbits(unit_action(self)).classes_as_units(self)]

    def __len__(self) -> int:
        return self.arrow_count


def disjoint_union(*groupoids: FiniteGroupoid) -> FiniteGroupoid:
    offsets, total = [], 0
    for G in groupoids:
        offsets.append(total)
        total += G.arrow_count
    units, src, rng, inv = [], [], [], []
    comp = [[UNDEFINED] * total for _ in range(total)]
    labels = []
    for k, (G, off) in enumerate(zip(groupoids, offsets)):
        units += [u + off for u in G.units]
        src += [s + off for s in G.src]
        rng += [r + off for r in G.rng]
        inv += [i + off for i in G.inv]
        labels += [(k, G.labels[g] if G.labels else g) for g in range(G.arrow_count)]
        for g, h in product(range(G.arrow_count), repeat=2):
            if G.comp[g][h] != UNDEFINED:
                comp[g + off][h + off] = G.comp[g][h] + off
    return FiniteGroupoid.from_tables(units, src, rng, inv, comp, labels)


def product_groupoid(G: FiniteGroupoid, H: FiniteGroupoid) -> FiniteGroupoid:
    """Cartesian product; arrow (g, h) has index g * |H| + h."""
    n = H.arrow_count

    def idx(g, h):
        return g * n + h

    arrows = [(g, h) for g in range(G.arrow_count) for h in range(n)]
    units = [idx(u, v) for u in G.units for v in H.units]
    src = [idx(G.src[g], H.src[h]) for g, h in arrows]
    rng = [idx(G.rng[g], H.rng[h]) for g, h in arrows]
    inv = [idx(G.inv[g], H.inv[h]) for g, h in arrows]
    comp = [[UNDEFINED] * len(arrows) for _ in arrows]
    for a, (g, h) in enumerate(arrows):
        for b, (g2, h2) in enumerate(arrows):
            gg, hh = G.comp[g][g2], H.comp[h][h2]
            if gg != UNDEFINED and hh != UNDEFINED:
                comp[a][b] = idx(gg, hh)
    return FiniteGroupoid.from_tables(units, src, rng, inv, comp, arrows)


def validate_groupoid(G: FiniteGroupoid) -> Report:
    """Brute-force scan of every groupoid axiom."""
    report = Report()
    n = G.arrow_count
    arrows = range(n)
    if len(G.src) != n or len(G.rng) != n or len(G.inv) != n or len(G.comp) != n:
        report.add("table sizes", n)
        return report
    if any(len(row) != n for row in G.comp):
        report.add("table sizes", "comp rows")
        return report
    unit_set = set(G.units)
    if len(unit_set) != len(G.units):
        report.add("units distinct", G.units)
    for g in arrows:
        for table, name in ((G.src, "src"), (G.rng, "rng")):
            if table[g] not in unit_set:
                report.add(f"{name} lands in units", g)
        if not 0 <= G.inv[g] < n:
            report.add("inv in range", g)
    if not report.ok:
        return report
    for u in G.units:
        if G.src[u] != u or G.rng[u] != u:
            report.add("unit arrows are loops at themselves", u)
    for g, h in product(arrows, repeat=2):
        c = G.comp[g][h]
        composable = G.src[g] == G.rng[h]
        if composable != (c != UNDEFINED):
            report.add("comp defined iff src(g) = rng(h)", (g, h))
            continue
        if composable:
            if not 0 <= c < n:
                report.add("comp in range", (g, h))
            elif G.rng[c] != G.rng[g] or G.src[c] != G.src[h]:
                report.add("rng(gh) = rng(g) and src(gh) = src(h)", (g, h))
    if not report.ok:
        return report
    for g in arrows:
        if G.comp[G.rng[g]][g] != g or G.comp[g][G.src[g]] != g:
            report.add("unit law", g)
        i = G.inv[g]
        if G.inv[i] != g:
            report.add("inverse is an involution", g)
        if G.src[i] != G.rng[g] or G.comp[i][g] != G.src[g] or G.comp[g][i] != G.rng[g]:
            report.add("inverse law", g)
    for g, h in product(arrows, repeat=2):
        gh = G.comp[g][h]
        if gh == UNDEFINED:
            continue
        for k in G.arrows_to[G.src[h]]:
            if G.comp[gh][k] != G.comp[g][G.comp[h][k]]:
                report.add("associativity", (g, h, k))
    return report


def isotropy(G: FiniteGroupoid, x: int) -> tuple[int, ...]:
    if x not in G.unit_set:
        raise ValueError(f"{x} is not a unit")
    return tuple(g for g in G.arrows_to[x] if G.src[g] == x)


@dataclass(frozen=True)
class GroupoidAction:
    """Left action of ``groupoid`` on ``point_count`` points; ``act[g][x]`` is
    ``g . x`` or -1 when ``src(g) != anchor[x]``."""

    groupoid: FiniteGroupoid
    point_count: int
    anchor: tuple[int, ...]
    act: tuple[tuple[int, ...], ...]

    @classmethod
    def from_function(cls, G: FiniteGroupoid, point_count: int, anchor, fn) -> "GroupoidAction":
        anchor = tuple(int(a) for a in anchor)
        table = tuple(
            tuple(int(fn(g, x)) if G.src[g] == anchor[x] else UNDEFINED for x in range(point_count))
            for g in range(G.arrow_count)
        )
        return cls(G, point_count, anchor, table)

    def __call__(self, g: int, x: int) -> int:
        y = self.act[g][x]
        if y == UNDEFINED:
            raise ValueError(f"arrow {g} does not act on point {x}")
        return y

    @cached_property
    def fibres(self) -> dict[int, tuple[int, ...]]:
        """Points over each unit."""
        out: dict[int, list[int]] = {u: [] for u in self.groupoid.units}
        for x, a in enumerate(self.anchor):
            out.setdefault(a, []).append(x)
        return {u: tuple(v) for u, v in out.items()}


def unit_action(G: FiniteGroupoid) -> GroupoidAction:
    """Canonical action of G on its units; point i is the unit ``G.units[i]``."""
    return GroupoidAction.from_function(
        G, len(G.units), G.units, lambda g, x: G.unit_index[G.rng[g]]
    )


def translation_action(G: FiniteGroupoid) -> GroupoidAction:
    """G acting on its own arrows by left multiplication."""
    return GroupoidAction.from_function(G, G.arrow_count, G.rng, lambda g, h: G.comp[g][h])


def validate_action(a: GroupoidAction) -> Report:
    report = Report()
    G = a.groupoid
    if len(a.anchor) != a.point_count:
        report.add("anchor size", len(a.anchor))
        return report
    for x, u in enumerate(a.anchor):
        if u not in G.unit_set:
            report.add("anchor lands in units", x)
    if len(a.act) != G.arrow_count or any(len(r) != a.point_count for r in a.act):
        report.add("action table size")
    if not report.ok:
        return report
    for g, x in product(range(G.arrow_count), range(a.point_count)):
        y = a.act[g][x]
        if (G.src[g] == a.anchor[x]) != (y != UNDEFINED):
            report.add("g.x defined iff src(g) = anchor(x)", (g, x))
        elif y != UNDEFINED:
            if not 0 <= y < a.point_count:
                report.add("action in range", (g, x))
            elif a.anchor[y] != G.rng[g]:
                report.add("anchor(g.x) = rng(g)", (g, x))
    if not report.ok:
        return report
    for x in range(a.point_count):
        if a.act[a.anchor[x]][x] != x:
            report.add("units act trivially", x)
    for g, h in product(range(G.arrow_count), repeat=2):
        gh = G.comp[g][h]
        if gh == UNDEFINED:
            continue
        for x in a.fibres.get(G.src[h], ()):
            if a.act[gh][x] != a.act[g][a.act[h][x]]:
                report.add("(gh).x = g.(h.x)", (g, h, x))
    return report


def action_groupoid(a: GroupoidAction) -> FiniteGroupoid:
    """``G ⋉ X``: arrows are pairs (g, x) with src(g) = anchor(x), ordered by
    (x, g); ``units[x]`` is the identity arrow at point x."""
    report = validate_action(a)
    if not report.ok:
        raise ValidationError("invalid action", report)
    G = a.groupoid
    pairs = [(g, x) for x in range(a.point_count) for g in G.arrows_from[a.anchor[x]]]
    return FiniteGroupoid.from_composition(
        pairs,
        [(a.anchor[x], x) for x in range(a.point_count)],
        src=lambda p: (a.anchor[p[1]], p[1]),
        rng=lambda p: (G.rng[p[0]], a.act[p[0]][p[1]]),
        mul=lambda p, q: (G.comp[p[0]][q[0]], q[1]),
    )


class OrbitPartition(NamedTuple):
    classes: tuple[tuple[int, ...], ...]
    class_of: tuple[int, ...]

    @property
    def representatives(self) -> tuple[int, ...]:
        return tuple(c[0] for c in self.classes)

    def classes_as_units(self, G: FiniteGroupoid):
        return [tuple(G.units[i] for i in c) for c in self.classes]

    def __len__(self) -> int:  # type: ignore[override]
        return len(self.classes)


def orbit_partition(point_count: int, moves) -> OrbitPartition:
    """Connected components of the graph whose edges are yielded by
    ``moves(x)``; classes are sorted and ordered by their minimum."""
    parent = list(range(point_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x in range(point_count):
        for y in moves(x):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
    groups: dict[int, list[int]] = {}
    for x in range(point_count):
        groups.setdefault(find(x), []).append(x)
    classes = tuple(sorted((tuple(v) for v in groups.values()), key=lambda c: c[0]))
    class_of = [0] * point_count
    for i, c in enumerate(classes):
        for x in c:
            class_of[x] = i
    return OrbitPartition(classes, tuple(class_of))


def orbits(a: GroupoidAction) -> OrbitPartition:
    G = a.groupoid
    return orbit_partition(
        a.point_count, lambda x: (a.act[g][x] for g in G.arrows_from[a.anchor[x]])
    )


class FreenessResult(NamedTuple):
    free: bool
    witness: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.free


def is_free(a: GroupoidAction) -> FreenessResult:
    """True iff no non-unit arrow fixes a point it acts on."""
    G = a.groupoid
    for x in range(a.point_count):
        for g in G.arrows_from[a.anchor[x]]:
            if a.act[g][x] == x and not G.is_unit(g):
                return FreenessResult(False, (g, x))
    return FreenessResult(True)


def find_groupoid_isomorphism(G: FiniteGroupoid, H: FiniteGroupoid) -> tuple[int, ...] | None:
    """Backtracking search for an arrow bijection preserving composition."""
    n = G.arrow_count
    if n != H.arrow_count or len(G.units) != len(H.units):
        return None
    order = sorted(range(n), key=lambda g: (not G.is_unit(g), g))
    image = [UNDEFINED] * n
    used = [False] * n

    def consistent(g: int) -> bool:
        fg = image[g]
        if G.is_unit(g) != H.is_unit(fg):
            return False
        for k in (G.src[g], G.rng[g], G.inv[g]):
            if image[k] != UNDEFINED:
                fk = image[k]
                if k == G.src[g] and fk != H.src[fg]:
                    return False
                if k == G.rng[g] and fk != H.rng[fg]:
                    return False
                if k == G.inv[g] and fk != H.inv[fg]:
                    return False
        for h in range(n):
            if image[h] == UNDEFINED:
                continue
            for a, b in ((g, h), (h, g)):
                c = G.comp[a][b]
                if c != UNDEFINED and image[c] != UNDEFINED:
                    if H.comp[image[a]][image[b]] != image[c]:
                        return False
                elif c == UNDEFINED and H.comp[image[a]][image[b]] != UNDEFINED:
                    return False
        return True

    def search(i: int) -> bool:
        if i == n:
            return True
        g = order[i]
        for cand in range(n):
            if used[cand]:
                continue
            image[g], used[cand] = cand, True
            if consistent(g) and search(i + 1):
                return True
            image[g], used[cand] = UNDEFINED, False
        return False

    return tuple(image) if search(0) else None
