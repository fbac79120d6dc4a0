import numpy as np
import pytest
from hypothesis import given, strategies as st

from etalecorr.cstar import (
    MultiplicityError,
    adjoint_operator,
    algebra_from_matrices,
    bimodule_maps,
    block_decomposition,
    column_module,
    complex_numbers,
    direct_sum,
    find_bimodule_isomorphism,
    groupoid_algebra,
    identity_bimodule,
    is_positive,
    k0,
    k0_map,
    matrix_algebra,
    min_eigenvalues,
    module_maps,
    norm,
    nullspace,
    numerical_rank,
    row_module,
    tensor_product,
    validate_algebra,
    validate_bimodule,
)
from etalecorr.groupoid import FiniteGroupoid
from etalecorr.groups import catalog

from conftest import rng_for, seeds

block_lists = st.lists(st.integers(1, 3), min_size=1, max_size=3)


def test_scalars():
    C = complex_numbers()
    assert C.dimension == 1
    assert k0(C).block_dims == (1,)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_matrix_algebra_is_one_block(n):
    A = matrix_algebra(n)
    assert A.dimension == n * n
    assert validate_algebra(A).ok
    assert block_decomposition(A).block_dims == (n,)


@pytest.mark.parametrize("name,blocks", [
    ("S3", [1, 1, 2]), ("Q8", [1, 1, 1, 1, 2]), ("D4", [1, 1, 1, 1, 2]), ("A4", [1, 1, 1, 3]),
])
def test_group_algebra_irreducible_degrees(name, blocks):
    # degrees of the irreducible representations
    A = groupoid_algebra(FiniteGroupoid.group(catalog()[name]))
    assert sorted(k0(A).block_dims) == blocks


@given(block_lists)
def test_direct_sum_blocks(dims):
    A = direct_sum([matrix_algebra(n) for n in dims])
    assert sorted(k0(A).block_dims) == sorted(dims)
    assert A.dimension == sum(n * n for n in dims)


@given(block_lists)
def test_identity_bimodule_gives_identity_map(dims):
    A = direct_sum([matrix_algebra(n) for n in dims])
    assert k0_map(identity_bimodule(A)).is_identity()


@given(block_lists, seeds)
def test_squares_are_positive(dims, seed):
    A = direct_sum([matrix_algebra(n) for n in dims])
    rng = rng_for(seed)
    a = rng.standard_normal(A.dimension) + 1j * rng.standard_normal(A.dimension)
    sq = A.multiply(A.adjoint(a), a)
    assert is_positive(A, sq)
    lo, skew = min_eigenvalues(A, sq[None])
    assert lo[0] >= -1e-8 and skew[0] <= 1e-8


def test_norm_of_matrix_unit():
    A = matrix_algebra(2)
    assert np.isclose(norm(A, A.basis(1)), 1.0)


def test_algebra_from_matrices_recovers_diagonal_algebra():
    A = algebra_from_matrices([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert validate_algebra(A).ok
    assert sorted(k0(A).block_dims) == [1, 1]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_column_and_row_modules(n):
    col, row = column_module(n), row_module(n)
    assert validate_bimodule(col).ok and validate_bimodule(row).ok
    assert k0_map(col).tolist() == [[1]]
    assert k0_map(row).tolist() == [[1]]
    T = tensor_product(col, row)
    assert T.dimension == n * n
    assert validate_bimodule(T).ok
    assert k0_map(T) == k0_map(row) @ k0_map(col)


def test_tensor_over_scalars_gives_dimension_product():
    T = tensor_product(row_module(2), column_module(2))
    # C^2 (x)_{M_2} C^2 collapses to C
    assert T.dimension == 1
    assert k0_map(T).tolist() == [[1]]
    assert k0_map(T) == k0_map(column_module(2)) @ k0_map(row_module(2))


def test_adjoint_operator_is_adjoint(rng):
    E = column_module(3)
    maps = module_maps(E, E)
    T = sum(rng.standard_normal() * m for m in maps)
    Ts = adjoint_operator(E, E, T)
    x, y = rng.standard_normal(3), rng.standard_normal(3)
    assert np.allclose(E.inner_product(T @ x, y), E.inner_product(x, Ts @ y))


def test_module_map_counts():
    # End of C^n as a right C-module is M_n; its bimodule maps are scalars
    E = column_module(3)
    assert len(module_maps(E, E)) == 9
    assert len(bimodule_maps(E, E)) == 1


def test_bimodule_isomorphism_found_for_identity():
    E = identity_bimodule(matrix_algebra(2))
    U = find_bimodule_isomorphism(E, E)
    assert U is not None and U.shape == (4, 4)


def test_zero_products_have_rank_zero():
    assert numerical_rank(np.full((4, 4), 1e-17)) == 0
    assert numerical_rank(np.eye(3)) == 3


def test_nullspace_of_tall_matrix():
    M = np.vstack([np.eye(3)[:2]] * 50)
    N = nullspace(M)
    assert N.shape == (3, 1)
    assert np.allclose(M @ N, 0)


def test_non_integer_multiplicity_is_rejected():
    E = column_module(2)
    bad = type(E)(E.left, E.right, E.lact[:, :1, :1], E.ract[:, :1, :1], E.inner[:1, :1])
    with pytest.raises(MultiplicityError):
        k0_map(bad)
