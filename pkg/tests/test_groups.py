import pytest

from etalecorr.groupoid import FiniteGroupoid, validate_groupoid
from etalecorr.groups import catalog, cyclic, dihedral, direct_product, is_group_table, symmetric
from etalecorr.verify import conjugacy_classes

# Class counts of the catalog groups, as tabulated in standard references.
CLASS_COUNTS = {
    "Z1": 1, "Z2": 2, "Z3": 3, "Z4": 4, "Z5": 5, "Z6": 6, "Z7": 7, "Z8": 8, "Z9": 9, "Z10": 10,
    "Z11": 11, "Z12": 12, "Z2xZ2": 4, "Z2xZ4": 8, "Z2xZ2xZ2": 8, "Z3xZ3": 9, "Z2xZ6": 12,
    "S3": 3, "D4": 5, "Q8": 5, "D5": 4, "D6": 6, "A4": 4, "Dic3": 6,
}
ORDERS = {"S3": 6, "D4": 8, "Q8": 8, "D5": 10, "D6": 12, "A4": 12, "Dic3": 12, "Z2xZ6": 12}


def test_catalog_covers_every_listed_group():
    assert set(catalog()) == set(CLASS_COUNTS)


@pytest.mark.parametrize("name", sorted(CLASS_COUNTS))
def test_catalog_tables_are_groups(name):
    table = catalog()[name]
    assert is_group_table(table)
    assert validate_groupoid(FiniteGroupoid.group(table)).ok
    if name in ORDERS:
        assert len(table) == ORDERS[name]


@pytest.mark.parametrize("name", sorted(CLASS_COUNTS))
def test_brute_force_class_count_matches_tabulated(name):
    assert conjugacy_classes(catalog()[name]) == CLASS_COUNTS[name]


def test_nonabelian_groups_are_nonabelian():
    for name in ("S3", "D4", "Q8", "A4", "Dic3"):
        t = catalog()[name]
        assert any(t[a][b] != t[b][a] for a in range(len(t)) for b in range(len(t)))


def test_constructors():
    assert len(cyclic(5)) == 5
    assert len(dihedral(4)) == 8
    assert len(symmetric(3)) == 6
    assert len(direct_product(cyclic(2), cyclic(3))) == 6
    assert conjugacy_classes(direct_product(cyclic(2), cyclic(3))) == 6


def test_rejects_non_group():
    assert not is_group_table([[0, 0], [0, 0]])
