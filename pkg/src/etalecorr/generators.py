"""Seeded random instances: groupoids, G-sets, correspondences, bundles.

Every generator takes a ``numpy.random.Generator`` so suites can derive
one independent stream per instance from a master seed.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

import numpy as np

from .bundles import (
    EquivariantCorrespondence,
    GCStarBundle,
    column_bundle,
    direct_sum_bundle,
    endomorphism_bundle,
    function_bundle,
    identity_correspondence_bundle,
    span_correspondence,
    trivial_bundle,
)
from .correspondence import (
    EtaleCorrespondence,
    action_correspondence,
    compose,
    from_homomorphism,
)
from .groupoid import (
    UNDEFINED,
    FiniteGroupoid,
    GroupoidAction,
    action_groupoid,
    disjoint_union,
    product_groupoid,
)
from .groups import cyclic, direct_product, dihedral

__all__ = [
    "SMALL_GROUPS",
    "random_groupoid",
    "random_gset",
    "random_homomorphism",
    "random_correspondence",
    "random_composable_pair",
    "small_correspondence",
    "pair_morita",
    "quotient_morita",
    "disjoint_union_correspondence",
    "morita_family",
    "random_bundle",
    "random_coefficient_correspondence",
    "subgroups",
]

SMALL_GROUPS = {
    "Z1": cyclic(1),
    "Z2": cyclic(2),
    "Z3": cyclic(3),
    "Z4": cyclic(4),
    "Z2xZ2": direct_product(cyclic(2), cyclic(2)),
    "S3": dihedral(3),
}


def _pick(rng: np.random.Generator, items: Sequence):
    return items[int(rng.integers(len(items)))]


def random_groupoid(rng: np.random.Generator, max_arrows: int = 8) -> FiniteGroupoid:
    """Disjoint union of components P_n x Gamma with at most ``max_arrows``
    arrows in total."""
    parts = []
    budget = max_arrows
    while budget > 0:
        options = [
            (n, name) for n in (1, 2) for name, t in SMALL_GROUPS.items()
            if n * n * len(t) <= budget
        ]
        n, name = _pick(rng, options)
        parts.append(product_groupoid(FiniteGroupoid.pair(n), FiniteGroupoid.group(SMALL_GROUPS[name])))
        budget -= n * n * len(SMALL_GROUPS[name])
        if rng.random() < 0.5:
            break
    return parts[0] if len(parts) == 1 else disjoint_union(*parts)


def subgroups(G: FiniteGroupoid, x: int) -> list[tuple[int, ...]]:
    """All subgroups of the isotropy group at x (generated by at most two elements)."""
    iso = [g for g in G.arrows_to[x] if G.src[g] == x]
    found = set()
    for k in range(3):
        for gens in combinations(iso, k):
            group = {x}
            frontier = [x]
            while frontier:
                nxt = []
                for a in frontier:
                    for b in gens:
                        c = G.comp[a][b]
                        if c not in group:
                            group.add(c)
                            nxt.append(c)
                frontier = nxt
            found.add(tuple(sorted(group)))
    return sorted(found)


def random_gset(rng: np.random.Generator, G: FiniteGroupoid, max_points: int = 6,
                allow_empty_fibres: bool = True) -> GroupoidAction:
    """Union of orbits G_u / K for random units u and isotropy subgroups K.
    With ``allow_empty_fibres=False`` every unit gets at least one point."""

    def orbit(u, K):
        out: list[frozenset] = []
        for g in G.arrows_from[u]:
            coset = frozenset(G.comp[g][k] for k in K)
            if coset not in out:
                out.append(coset)
        return out

    units = list(G.units)
    orbits: list[list[frozenset]] = []
    if not allow_empty_fibres:
        covered: set[int] = set()
        for u in units:
            if u not in covered:
                orb = orbit(u, _pick(rng, subgroups(G, u)))
                orbits.append(orb)
                covered |= {G.rng[next(iter(c))] for c in orb}
    size = sum(len(o) for o in orbits)
    for _ in range(10):
        if orbits and rng.random() < 0.5:
            break
        u = _pick(rng, units)
        orb = orbit(u, _pick(rng, subgroups(G, u)))
        if orbits and size + len(orb) > max_points:
            continue
        orbits.append(orb)
        size += len(orb)
    points = [(k, c) for k, orb in enumerate(orbits) for c in orb]
    index = {p: i for i, p in enumerate(points)}

    def act(g, i):
        k, c = points[i]
        return index[(k, frozenset(G.comp[g][a] for a in c))]

    anchor = [G.rng[next(iter(c))] for _, c in points]
    return GroupoidAction.from_function(G, len(points), anchor, act)


def random_homomorphism(rng: np.random.Generator, K: FiniteGroupoid, H: FiniteGroupoid) -> tuple[int, ...]:
    """Backtracking search in random order; a homomorphism always exists
    (send each component to a unit)."""
    n = K.arrow_count
    order = sorted(range(n), key=lambda a: (not K.is_unit(a), a))
    image = [UNDEFINED] * n

    def consistent(a: int) -> bool:
        h = image[a]
        if K.is_unit(a) and not H.is_unit(h):
            return False
        s, r = K.src[a], K.rng[a]
        if image[s] != UNDEFINED and H.src[h] != image[s]:
            return False
        if image[r] != UNDEFINED and H.rng[h] != image[r]:
            return False
        for b in range(n):
            if image[b] == UNDEFINED:
                continue
            for x, y in ((a, b), (b, a)):
                c = K.comp[x][y]
                if c != UNDEFINED and image[c] != UNDEFINED:
                    if H.comp[image[x]][image[y]] != image[c]:
                        return False
        return True

    def search(i: int) -> bool:
        if i == n:
            return True
        a = order[i]
        if image[a] != UNDEFINED:
            return search(i + 1)
        candidates = list(H.units) if K.is_unit(a) else list(range(H.arrow_count))
        rng.shuffle(candidates)
        for h in candidates:
            image[a] = h
            ai = K.inv[a]
            set_inverse = ai != a and image[ai] == UNDEFINED
            if set_inverse:
                image[ai] = H.inv[h]
            if consistent(a) and (not set_inverse or consistent(ai)) and search(i + 1):
                return True
            if set_inverse:
                image[ai] = UNDEFINED
            image[a] = UNDEFINED
        return False

    if not search(0):
        raise RuntimeError("no homomorphism found")
    return tuple(image)


def random_correspondence(rng: np.random.Generator, G: FiniteGroupoid, H: FiniteGroupoid,
                          max_points: int = 8, tries: int = 60) -> EtaleCorrespondence:
    """A G-set T and a homomorphism phi: G ⋉ T -> H give the composite of
    the action correspondence with Omega_phi; every étale correspondence
    arises this way up to isomorphism."""
    best = None
    fibre = max(len(H.arrows_to[y]) for y in H.units)
    for attempt in range(tries):
        # shrink the G-set once plain attempts keep overshooting
        cap = max(1, max_points // 2 if attempt < tries // 2 else max_points // fibre)
        T = random_gset(rng, G, max_points=cap)
        GT = action_groupoid(T)
        phi = random_homomorphism(rng, GT, H)
        omega = compose(action_correspondence(T), from_homomorphism(GT, H, phi))
        if omega.point_count <= max_points:
            return omega
        if best is None or omega.point_count < best.point_count:
            best = omega
    return best


def random_composable_pair(rng: np.random.Generator, max_arrows: int = 8, max_points: int = 8):
    """Omega: G -> H and Lambda: H -> K, both with at most ``max_points``
    points; groupoids are redrawn when no small enough bispace exists."""
    while True:
        G, H, K = (random_groupoid(rng, max_arrows) for _ in range(3))
        omega = random_correspondence(rng, G, H, max_points)
        lam = random_correspondence(rng, H, K, max_points)
        if omega.point_count <= max_points and lam.point_count <= max_points:
            return omega, lam


def small_correspondence(rng: np.random.Generator, max_arrows: int = 8, max_points: int = 8):
    """A random Omega: G -> H with at most ``max_points`` points."""
    while True:
        G, H = random_groupoid(rng, max_arrows), random_groupoid(rng, max_arrows)
        omega = random_correspondence(rng, G, H, max_points)
        if omega.point_count <= max_points:
            return omega


# -- Morita equivalences -------------------------------------------------------------


def pair_morita(n: int, m: int, gamma: Sequence[Sequence[int]]) -> EtaleCorrespondence:
    """P_n x Gamma -> P_m x Gamma on [n] x Gamma x [m]."""
    Gam = FiniteGroupoid.group(gamma)
    G = product_groupoid(FiniteGroupoid.pair(n), Gam)
    H = product_groupoid(FiniteGroupoid.pair(m), Gam)
    q = len(gamma)
    e = Gam.units[0]
    points = [(i, c, j) for i in range(n) for c in range(q) for j in range(m)]
    index = {p: k for k, p in enumerate(points)}

    def unit_of(i, size):
        return (i * size + i) * q + e

    def left(g, w):
        a, c = divmod(g, q)
        i, _ = divmod(a, n)
        _, gc, k = points[w]
        return index[(i, gamma[c][gc], k)]

    def right(w, h):
        b, c = divmod(h, q)
        _, jj = divmod(b, m)
        i, gc, _ = points[w]
        return index[(i, gamma[gc][c], jj)]

    return EtaleCorrespondence.build(
        G, H, len(points),
        rho=[unit_of(i, n) for i, _, _ in points],
        sigma=[unit_of(j, m) for _, _, j in points],
        left_fn=left, right_fn=right, labels=points,
    )


def quotient_morita(gamma: Sequence[Sequence[int]], subgroup: Sequence[int]) -> EtaleCorrespondence:
    """Gamma ⋉ Gamma/K -> K on Gamma, with left translation and right
    multiplication by K."""
    Gam = FiniteGroupoid.group(gamma)
    K_elems = sorted(subgroup)
    cosets: list[frozenset] = []
    coset_of = {}
    for g in range(len(gamma)):
        c = frozenset(gamma[g][k] for k in K_elems)
        if c not in cosets:
            cosets.append(c)
        coset_of[g] = cosets.index(c)
    X = GroupoidAction.from_function(
        Gam, len(cosets), [Gam.units[0]] * len(cosets),
        lambda g, x: coset_of[gamma[g][min(cosets[x])]],
    )
    GX = action_groupoid(X)
    # K as a group: relabel subgroup elements 0..|K|-1
    kidx = {k: i for i, k in enumerate(K_elems)}
    K_table = [[kidx[gamma[a][b]] for b in K_elems] for a in K_elems]
    Kg = FiniteGroupoid.group(K_table)
    return EtaleCorrespondence.build(
        GX, Kg, len(gamma),
        rho=[GX.units[coset_of[g]] for g in range(len(gamma))],
        sigma=[Kg.units[0]] * len(gamma),
        left_fn=lambda a, w: gamma[GX.labels[a][0]][w],
        right_fn=lambda w, k: gamma[w][K_elems[k]],
        labels=range(len(gamma)),
    )


def disjoint_union_correspondence(*parts: EtaleCorrespondence) -> EtaleCorrespondence:
    G = disjoint_union(*(p.G for p in parts))
    H = disjoint_union(*(p.H for p in parts))
    goff, hoff, woff = [], [], []
    a = b = c = 0
    for p in parts:
        goff.append(a)
        hoff.append(b)
        woff.append(c)
        a += p.G.arrow_count
        b += p.H.arrow_count
        c += p.point_count
    owner = [k for k, p in enumerate(parts) for _ in range(p.point_count)]
    rho = [parts[owner[w]].rho[w - woff[owner[w]]] + goff[owner[w]] for w in range(c)]
    sigma = [parts[owner[w]].sigma[w - woff[owner[w]]] + hoff[owner[w]] for w in range(c)]

    def left(g, w):
        k = owner[w]
        return parts[k].gact(g - goff[k], w - woff[k]) + woff[k]

    def right(w, h):
        k = owner[w]
        return parts[k].hact(w - woff[k], h - hoff[k]) + woff[k]

    return EtaleCorrespondence.build(G, H, c, rho, sigma, left, right)


def morita_family(rng: np.random.Generator, count: int) -> list[EtaleCorrespondence]:
    """Mixed Morita bispaces: pair-groupoid amplifications, quotient
    equivalences and disjoint unions of both (group bundles)."""
    out = []
    names = list(SMALL_GROUPS)
    for k in range(count):
        kind = k % 3
        if kind == 0:
            n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            name = _pick(rng, [nm for nm in names if len(SMALL_GROUPS[nm]) * max(n, m) ** 2 <= 18])
            out.append(pair_morita(n, m, SMALL_GROUPS[name]))
        elif kind == 1:
            name = _pick(rng, [nm for nm in names if len(SMALL_GROUPS[nm]) > 1])
            Gam = FiniteGroupoid.group(SMALL_GROUPS[name])
            K = _pick(rng, subgroups(Gam, Gam.units[0]))
            out.append(quotient_morita(SMALL_GROUPS[name], K))
        else:
            parts = []
            for _ in range(int(rng.integers(2, 4))):
                name = _pick(rng, [nm for nm in names if len(SMALL_GROUPS[nm]) <= 4])
                parts.append(pair_morita(1, 1, SMALL_GROUPS[name]))
            out.append(disjoint_union_correspondence(*parts))
    return out


# -- coefficient bundles --------------------------------------------------------------


def random_bundle(rng: np.random.Generator, H: FiniteGroupoid, max_points: int = 3) -> GCStarBundle:
    kind = int(rng.integers(4))
    if kind == 0:
        return trivial_bundle(H)
    Y = random_gset(rng, H, max_points, allow_empty_fibres=False)
    if kind == 1:
        return function_bundle(Y)
    if kind == 2:
        return endomorphism_bundle(Y)
    return direct_sum_bundle(trivial_bundle(H), function_bundle(Y))


def random_coefficient_correspondence(rng: np.random.Generator, H: FiniteGroupoid,
                                      max_points: int = 3, nontrivial: bool = False) -> EquivariantCorrespondence:
    """An H-equivariant correspondence: a span of H-sets, the column bundle
    End(C^Z) -> C, or (unless ``nontrivial``) an identity."""
    kind = int(rng.integers(2 if nontrivial else 3))
    Y = random_gset(rng, H, max_points, allow_empty_fibres=False)
    if kind == 1:
        return column_bundle(Y)
    if kind == 2:
        return identity_correspondence_bundle(random_bundle(rng, H, max_points))
    Z = random_gset(rng, H, max_points, allow_empty_fibres=False)
    return _random_span(rng, Y, Z)


def _random_span(rng: np.random.Generator, Y: GroupoidAction, Z: GroupoidAction) -> EquivariantCorrespondence:
    """W a nonempty union of diagonal orbits of the fibre product Y x Z."""
    H = Y.groupoid
    pairs = [(y, z) for y in range(Y.point_count) for z in range(Z.point_count)
             if Y.anchor[y] == Z.anchor[z]]
    index = {p: i for i, p in enumerate(pairs)}
    seen = [False] * len(pairs)
    orbits = []
    for i, (y, z) in enumerate(pairs):
        if seen[i]:
            continue
        orb = sorted({index[(Y.act[g][y], Z.act[g][z])] for g in H.arrows_from[Y.anchor[y]]})
        for j in orb:
            seen[j] = True
        orbits.append(orb)
    chosen = [o for o in orbits if rng.random() < 0.6] or [orbits[0]]
    # make sure every y is covered so the left action stays unital on all fibres
    covered = {pairs[i][0] for o in chosen for i in o}
    for o in orbits:
        if any(pairs[i][0] not in covered for i in o):
            chosen.append(o)
            covered |= {pairs[i][0] for i in o}
    members = sorted(i for o in chosen for i in o)
    wpts = [pairs[i] for i in members]
    windex = {p: k for k, p in enumerate(wpts)}
    W = GroupoidAction.from_function(
        H, len(wpts), [Y.anchor[y] for y, _ in wpts],
        lambda g, k: windex[(Y.act[g][wpts[k][0]], Z.act[g][wpts[k][1]])],
    )
    return span_correspondence(Y, Z, W, [y for y, _ in wpts], [z for _, z in wpts])
