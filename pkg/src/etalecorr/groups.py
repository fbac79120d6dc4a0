"""Small finite groups as multiplication tables."""

from __future__ import annotations

import cmath
from itertools import product
from typing import Callable, Hashable, Sequence

from .groupoid import FiniteGroupoid

Table = list[list[int]]


def closure(generators: Sequence[Hashable], mul: Callable, identity: Hashable) -> tuple[list, Table]:
    """Elements (identity first, BFS order) and table of the generated group."""
    elements = [identity]
    index = {identity: 0}
    frontier = [identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in generators:
                y = mul(x, g)
                if y not in index:
                    index[y] = len(elements)
                    elements.append(y)
                    nxt.append(y)
        frontier = nxt
    table = [[index[mul(a, b)] for b in elements] for a in elements]
    return elements, table


def _compose_perm(p, q):
    # (p q)(i) = p(q(i))
    return tuple(p[i] for i in q)


def permutation_group(generators: Sequence[Sequence[int]]) -> Table:
    n = len(generators[0])
    return closure([tuple(g) for g in generators], _compose_perm, tuple(range(n)))[1]


def cyclic(n: int) -> Table:
    return [[(a + b) % n for b in range(n)] for a in range(n)]


def dihedral(n: int) -> Table:
    """Symmetries of the n-gon, order 2n."""
    if n == 1:
        return cyclic(2)
    if n == 2:
        return direct_product(cyclic(2), cyclic(2))
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return permutation_group([rot, ref])


def symmetric(n: int) -> Table:
    if n == 1:
        return cyclic(1)
    swap = (1, 0) + tuple(range(2, n))
    cycle = tuple((i + 1) % n for i in range(n))
    return permutation_group([swap, cycle])


def alternating4() -> Table:
    return permutation_group([(1, 2, 0, 3), (1, 0, 3, 2)])


def direct_product(a: Table, b: Table) -> Table:
    m = len(b)
    return [
        [a[i // m][j // m] * m + b[i % m][j % m] for j in range(len(a) * m)]
        for i in range(len(a) * m)
    ]


def _matrix_group(generators) -> Table:
    def key(m):
        return tuple((round(z.real, 9) + 0.0, round(z.imag, 9) + 0.0) for z in m)

    def mul(a, b):
        # 2x2 matrices stored row-major as 4-tuples of rounded pairs
        x = [complex(*p) for p in a]
        y = [complex(*p) for p in b]
        out = (
            x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3],
        )
        return key(out)

    gens = [key(g) for g in generators]
    return closure(gens, mul, key((1, 0, 0, 1)))[1]


def quaternion8() -> Table:
    i = (1j, 0, 0, -1j)
    j = (0, 1, -1, 0)
    return _matrix_group([i, j])


def dicyclic3() -> Table:
    """Order 12 group <a, x | a^6, x^2 = a^3, x a x^-1 = a^-1>."""
    z = cmath.exp(2j * cmath.pi / 6)
    a = (z, 0, 0, 1 / z)
    x = (0, -1, 1, 0)
    return _matrix_group([a, x])


def catalog() -> dict[str, Table]:
    """All groups used by the conjugacy checks, keyed by a short name."""
    groups = {f"Z{n}": cyclic(n) for n in range(1, 13)}
    groups.update(
        {
            "Z2xZ2": direct_product(cyclic(2), cyclic(2)),
            "Z2xZ4": direct_product(cyclic(2), cyclic(4)),
            "Z2xZ2xZ2": direct_product(direct_product(cyclic(2), cyclic(2)), cyclic(2)),
            "Z3xZ3": direct_product(cyclic(3), cyclic(3)),
            "Z2xZ6": direct_product(cyclic(2), cyclic(6)),
            "S3": dihedral(3),
            "D4": dihedral(4),
            "Q8": quaternion8(),
            "D5": dihedral(5),
            "D6": dihedral(6),
            "A4": alternating4(),
            "Dic3": dicyclic3(),
        }
    )
    return groups


def group_groupoid(table: Table) -> FiniteGroupoid:
    return FiniteGroupoid.group(table)


def is_group_table(table: Table) -> bool:
    n = len(table)
    rows_ok = all(sorted(row) == list(range(n)) for row in table)
    cols_ok = all(sorted(table[i][j] for i in range(n)) == list(range(n)) for j in range(n))
    assoc = all(
        table[table[a][b]][c] == table[a][table[b][c]] for a, b, c in product(range(n), repeat=3)
    )
    return rows_ok and cols_ok and assoc
