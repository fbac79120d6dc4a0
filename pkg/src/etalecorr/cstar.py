"""Finite-dimensional C*-algebras given by structure constants.

An algebra of dimension d is stored as a multiplication tensor
``mult[i, j, k]`` (``e_i e_j = sum_k mult[i, j, k] e_k``), the matrix of the
involution on the basis (``e_i* = sum_j star[j, i] e_j``), a faithful trace
vector and the unit. The C*-norm and positivity come from the left regular
representation on the trace GNS space, which is faithful in finite
dimensions, so there is no distinction between full and reduced norms.

Hilbert bimodules store the left action, the right action and the inner
product as dense tensors over the chosen bases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, cmp_to_key
from typing import Any, Sequence

import numpy as np

from .report import Report

__all__ = [
    "ATOL",
    "FinDimCStarAlgebra",
    "BlockDecomposition",
    "K0Data",
    "K0Map",
    "HilbertBimodule",
    "InteriorTensor",
    "validate_algebra",
    "validate_bimodule",
    "groupoid_algebra",
    "complex_numbers",
    "matrix_algebra",
    "direct_sum",
    "algebra_from_matrices",
    "block_decomposition",
    "k0",
    "is_positive",
    "norm",
    "min_eigenvalues",
    "identity_bimodule",
    "column_module",
    "row_module",
    "tensor_product",
    "k0_map",
    "adjoint_operator",
    "module_maps",
    "bimodule_maps",
    "find_bimodule_isomorphism",
    "nullspace",
    "numerical_rank",
]

ATOL = 1e-8
RANK_RTOL = 1e-8
ROUND_TOL = 1e-6
CLUSTER_RTOL = 1e-8


def _frozen(x, dtype=complex) -> np.ndarray:
    arr = np.array(x, dtype=dtype)
    arr.setflags(write=False)
    return arr


def nullspace(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of M."""
    n = M.shape[1]
    if M.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=complex)
    if M.shape[0] > n:
        # tall matrices: the kernel of R from a QR factorisation is the same
        M = np.linalg.qr(M, mode="r")
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    cutoff = rtol * s[0] if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > cutoff)) if s.size and s[0] > 0 else 0
    return vh[rank:].conj().T


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL, atol: float = ATOL) -> int:
    """Singular values above both the relative and the absolute threshold;
    the absolute floor keeps rounding noise in a zero product at rank 0."""
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0:
        return 0
    return int(np.sum(s > max(rtol * s[0], atol)))


def _psd_powers(Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh((Q + Q.conj().T) / 2)
    w = np.clip(w, 0, None)
    root = (v * np.sqrt(w)) @ v.conj().T
    inv_root = (v * np.where(w > 0, 1 / np.sqrt(np.where(w > 0, w, 1)), 0)) @ v.conj().T
    return root, inv_root


@dataclass(frozen=True, eq=False)
class FinDimCStarAlgebra:
    mult: np.ndarray
    star: np.ndarray
    trace: np.ndarray
    unit: np.ndarray
    labels: tuple[Any, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("mult", "star", "trace", "unit"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def dimension(self) -> int:
        return self.unit.shape[0]

    def basis(self, i: int) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=complex)
        v[i] = 1
        return v

    def multiply(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", a, b, self.mult)

    def adjoint(self, a) -> np.ndarray:
        return self.star @ np.conj(a)

    def tau(self, a) -> complex:
        return complex(self.trace @ a)

    def left_regular(self, a) -> np.ndarray:
        return np.einsum("i,ijk->kj", a, self.mult)

    def right_regular(self, b) -> np.ndarray:
        return np.einsum("j,ijk->ki", b, self.mult)

    @cached_property
    def gram(self) -> np.ndarray:
        """``gram[i, j] = tau(e_i* e_j)``."""
        return np.einsum("li,ljk,k->ij", self.star, self.mult, self.trace)

    @cached_property
    def _gns(self) -> tuple[np.ndarray, np.ndarray]:
        return _psd_powers(self.gram)

    def represent(self, a) -> np.ndarray:
        """Left regular operator of a in an orthonormal basis of the GNS space."""
        root, inv_root = self._gns
        return root @ self.left_regular(a) @ inv_root

    @cached_property
    def blocks(self) -> "BlockDecomposition":
        return block_decomposition(self, seed=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinDimCStarAlgebra):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("mult", "star", "trace", "unit")
        )

    __hash__ = object.__hash__


# -- constructors ---------------------------------------------------------------


def complex_numbers() -> FinDimCStarAlgebra:
    return FinDimCStarAlgebra(np.ones((1, 1, 1)), np.ones((1, 1)), np.ones(1), np.ones(1))


def zero_algebra() -> FinDimCStarAlgebra:
    return FinDimCStarAlgebra(np.zeros((0, 0, 0)), np.zeros((0, 0)), np.zeros(0), np.zeros(0))


def matrix_algebra(n: int) -> FinDimCStarAlgebra:
    """M_n on matrix units E_ij (index i*n + j) with the standard trace."""
    d = n * n
    mult = np.zeros((d, d, d))
    star = np.zeros((d, d))
    trace = np.zeros(d)
    unit = np.zeros(d)
    for i in range(n):
        trace[i * n + i] = unit[i * n + i] = 1
        for j in range(n):
            star[j * n + i, i * n + j] = 1
            for l in range(n):
                mult[i * n + j, j * n + l, i * n + l] = 1
    return FinDimCStarAlgebra(mult, star, trace, unit)


def direct_sum(algebras: Sequence[FinDimCStarAlgebra]) -> FinDimCStarAlgebra:
    dims = [A.dimension for A in algebras]
    d = sum(dims)
    mult = np.zeros((d, d, d), dtype=complex)
    star = np.zeros((d, d), dtype=complex)
    trace = np.zeros(d, dtype=complex)
    unit = np.zeros(d, dtype=complex)
    off = 0
    for A, n in zip(algebras, dims):
        s = slice(off, off + n)
        mult[s, s, s] = A.mult
        star[s, s] = A.star
        trace[s] = A.trace
        unit[s] = A.unit
        off += n
    return FinDimCStarAlgebra(mult, star, trace, unit)


def algebra_from_matrices(basis: Sequence[np.ndarray]) -> FinDimCStarAlgebra:
    """Structure constants of the span of ``basis``, assumed to be a unital
    *-subalgebra of some M_n; the trace is the matrix trace."""
    B = np.array([np.asarray(b, dtype=complex) for b in basis])
    d, n, _ = B.shape
    flat = B.reshape(d, n * n).T
    pinv = np.linalg.pinv(flat)

    def coords(M):
        c = pinv @ M.reshape(-1)
        if np.linalg.norm(flat @ c - M.reshape(-1)) > 1e-9 * max(1, np.linalg.norm(M)):
            raise ValueError("matrix span is not closed under the algebra operations")
        return c

    mult = np.array([[coords(B[i] @ B[j]) for j in range(d)] for i in range(d)])
    star = np.array([coords(B[i].conj().T) for i in range(d)]).T
    trace = np.array([np.trace(B[i]) for i in range(d)])
    unit = coords(np.eye(n))
    clean = lambda x: np.where(np.abs(x) < 1e-12, 0, np.round(x, 12))
    return FinDimCStarAlgebra(clean(mult), clean(star), clean(trace), clean(unit))


def groupoid_algebra(G) -> FinDimCStarAlgebra:
    """Convolution algebra of a finite groupoid on the basis of arrows."""
    n = G.arrow_count
    mult = np.zeros((n, n, n))
    star = np.zeros((n, n))
    trace = np.zeros(n)
    unit = np.zeros(n)
    for g in range(n):
        star[G.inv[g], g] = 1
        for h in G.arrows_to[G.src[g]]:
            mult[g, h, G.comp[g][h]] = 1
    for u in G.units:
        trace[u] = unit[u] = 1
    return FinDimCStarAlgebra(mult, star, trace, unit)


# -- validation -----------------------------------------------------------------


def _close(a, b, tol=ATOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(a), initial=0)), float(np.max(np.abs(b), initial=0)))
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0) <= tol * scale)


def validate_algebra(A: FinDimCStarAlgebra, tol: float = ATOL, full_limit: int = 24, seed: int = 0) -> Report:
    """Axiom scan. Associativity is checked on every basis triple up to
    dimension ``full_limit`` and on seeded random triples beyond it."""
    report = Report()
    d = A.dimension
    if A.mult.shape != (d, d, d) or A.star.shape != (d, d) or A.trace.shape != (d,):
        report.add("tensor shapes", (A.mult.shape, A.star.shape, A.trace.shape))
        return report
    m = A.mult
    if d <= full_limit:
        lhs = np.einsum("ijl,lkm->ijkm", m, m)
        rhs = np.einsum("jkl,ilm->ijkm", m, m)
        bad = np.argwhere(np.abs(lhs - rhs) > tol * max(1, np.abs(lhs).max(initial=0)))
        if bad.size:
            report.add("associativity", tuple(int(x) for x in bad[0][:3]))
    else:
        rng = np.random.default_rng(seed)
        for k in range(8):
            a, b, c = (rng.standard_normal(d) + 1j * rng.standard_normal(d) for _ in range(3))
            if not _close(A.multiply(A.multiply(a, b), c), A.multiply(a, A.multiply(b, c)), tol):
                report.add("associativity", f"random triple {k}")
                break
    eye = np.eye(d)
    if not _close(A.left_regular(A.unit), eye, tol) or not _close(A.right_regular(A.unit), eye, tol):
        report.add("unit is two-sided")
    if not _close(A.star @ np.conj(A.star), eye, tol):
        report.add("involution is an involution")
    lhs = np.einsum("kl,ijl->ijk", A.star, np.conj(m), optimize=True)
    rhs = np.einsum("aj,bi,abk->ijk", A.star, A.star, m, optimize=True)
    bad = np.argwhere(np.abs(lhs - rhs) > tol * max(1, np.abs(lhs).max(initial=0)))
    if bad.size:
        report.add("(e_i e_j)* = e_j* e_i*", tuple(int(x) for x in bad[0][:2]))
    pairing = m @ A.trace
    if not _close(pairing, pairing.T, tol):
        bad = np.argwhere(np.abs(pairing - pairing.T) > tol)
        report.add("tau(ab) = tau(ba)", tuple(int(x) for x in bad[0]) if bad.size else None)
    Q = A.gram
    if not _close(Q, Q.conj().T, tol):
        report.add("trace form is Hermitian")
    elif d:
        w = np.linalg.eigvalsh((Q + Q.conj().T) / 2)
        if w[0] <= tol * max(1.0, w[-1]):
            report.add("trace form is positive definite", float(w[0]))
    return report


# -- block decomposition --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Minimal central projections (rows) and matrix sizes of the blocks."""

    projections: np.ndarray
    block_dims: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.block_dims)


class DecompositionError(RuntimeError):
    pass


def center_basis(A: FinDimCStarAlgebra) -> np.ndarray:
    d = A.dimension
    m = A.mult
    # row (j, k), column i: coefficient k of e_j e_i - e_i e_j
    K = (m.transpose(0, 2, 1) - m.transpose(1, 2, 0)).reshape(d * d, d)
    return nullspace(K)


def _compare_blocks(x, y) -> int:
    if x[0] != y[0]:
        return -1 if x[0] < y[0] else 1
    for a, b in zip(x[1], y[1]):
        for u, v in ((a.real, b.real), (a.imag, b.imag)):
            if abs(u - v) > ROUND_TOL:
                return -1 if u < v else 1
    return 0


def block_decomposition(A: FinDimCStarAlgebra, seed: int = 0, retries: int = 8) -> BlockDecomposition:
    """Artin-Wedderburn blocks from the spectrum of a random self-adjoint
    central element. The result does not depend on the seed."""
    d = A.dimension
    if d == 0:
        return BlockDecomposition(np.zeros((0, 0), dtype=complex), ())
    C = center_basis(A)
    c = C.shape[1]
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        # complex weights: a real draw would tie conjugate characters
        z = C @ (rng.standard_normal(c) + 1j * rng.standard_normal(c))
        z = (z + A.adjoint(z)) / 2
        M = C.conj().T @ A.left_regular(z) @ C
        vals, vecs = np.linalg.eig(M)
        order = np.argsort(vals.real)
        vals, vecs = vals[order].real, vecs[:, order]
        scale = max(1.0, float(np.abs(vals).max()))
        if c == 1 or np.min(np.diff(vals)) > CLUSTER_RTOL * scale:
            break
    else:
        raise DecompositionError(f"eigenvalue clusters stayed ambiguous after {retries} draws")
    projections = []
    for k in range(c):
        p = C @ vecs[:, k]
        q = A.multiply(p, p)
        p = p * (np.vdot(p, p) / np.vdot(p, q))
        for _ in range(4):
            p = (p + A.adjoint(p)) / 2
            p2 = A.multiply(p, p)
            p = 3 * p2 - 2 * A.multiply(p2, p)
        projections.append(p)
    blocks = []
    for p in projections:
        size = float(np.trace(A.left_regular(p)).real)
        a = int(round(np.sqrt(max(size, 0))))
        if abs(size - a * a) > ROUND_TOL * max(1, size):
            raise DecompositionError(f"block of dimension {size} is not a square")
        blocks.append((a, p))
    blocks.sort(key=cmp_to_key(_compare_blocks))
    P = np.array([p for _, p in blocks])
    dims = tuple(a for a, _ in blocks)
    if sum(a * a for a in dims) != d:
        raise DecompositionError(f"block sizes {dims} do not fill dimension {d}")
    if not _close(P.sum(axis=0), A.unit, 1e-6):
        raise DecompositionError("central projections do not sum to the unit")
    return BlockDecomposition(_frozen(P), dims)


@dataclass(frozen=True)
class K0Data:
    rank: int
    block_dims: tuple[int, ...]
    k1: int = 0  # finite-dimensional algebras have trivial K_1


def k0(A: FinDimCStarAlgebra) -> K0Data:
    b = A.blocks
    return K0Data(b.rank, b.block_dims)


# -- positivity -----------------------------------------------------------------


def min_eigenvalues(A: FinDimCStarAlgebra, elements: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Minimum eigenvalue of the Hermitian part and the anti-Hermitian
    residue of the represented operator, for a stack of elements."""
    root, inv_root = A._gns
    L = np.einsum("ni,ijk->nkj", elements, A.mult)
    X = root @ L @ inv_root
    herm = (X + np.conj(np.swapaxes(X, 1, 2))) / 2
    skew = np.abs(X - herm).reshape(len(X), -1).max(axis=1, initial=0)
    return np.linalg.eigvalsh(herm)[:, 0], skew


def is_positive(A: FinDimCStarAlgebra, a, tol: float = ATOL) -> bool:
    lo, skew = min_eigenvalues(A, np.asarray(a, dtype=complex)[None])
    return bool(lo[0] >= -tol and skew[0] <= tol * max(1.0, norm(A, a)))


def norm(A: FinDimCStarAlgebra, a) -> float:
    if A.dimension == 0:
        return 0.0
    return float(np.linalg.norm(A.represent(a), 2))


# -- Hilbert bimodules ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HilbertBimodule:
    """Correspondence ``left -> right``: ``lact[i]`` is the operator of the
    basis element e_i of ``left``, ``ract[j]`` the operator xi -> xi . b_j,
    and ``inner[p, q]`` the coefficients of <xi_p, xi_q> in ``right``."""

    left: FinDimCStarAlgebra
    right: FinDimCStarAlgebra
    lact: np.ndarray
    ract: np.ndarray
    inner: np.ndarray

    def __post_init__(self):
        for name in ("lact", "ract", "inner"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def dimension(self) -> int:
        return self.inner.shape[0]

    def left_op(self, a) -> np.ndarray:
        return np.einsum("i,ixy->xy", a, self.lact)

    def right_op(self, b) -> np.ndarray:
        return np.einsum("j,jxy->xy", b, self.ract)

    def inner_product(self, x, y) -> np.ndarray:
        return np.einsum("p,q,pqk->k", np.conj(x), y, self.inner)

    @cached_property
    def scalar_gram(self) -> np.ndarray:
        return self.inner @ self.right.trace

    def __eq__(self, other) -> bool:
        if not isinstance(other, HilbertBimodule):
            return NotImplemented
        return (self.left == other.left and self.right == other.right and all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in ("lact", "ract", "inner")
        ))

    __hash__ = object.__hash__


def identity_bimodule(A: FinDimCStarAlgebra) -> HilbertBimodule:
    """A as a correspondence from itself to itself."""
    lact = np.array([A.left_regular(A.basis(i)) for i in range(A.dimension)]).reshape(A.dimension, A.dimension, A.dimension)
    ract = np.array([A.right_regular(A.basis(j)) for j in range(A.dimension)]).reshape(A.dimension, A.dimension, A.dimension)
    inner = np.einsum("lp,lqk->pqk", A.star, A.mult)
    return HilbertBimodule(A, A, lact, ract, inner)


def column_module(n: int) -> HilbertBimodule:
    """C^n as a correspondence M_n -> C."""
    M = matrix_algebra(n)
    lact = np.zeros((n * n, n, n))
    for i in range(n):
        for j in range(n):
            lact[i * n + j, i, j] = 1
    return HilbertBimodule(M, complex_numbers(), lact, np.eye(n)[None], np.eye(n)[:, :, None])


def row_module(n: int) -> HilbertBimodule:
    """C^n as row vectors, a correspondence C -> M_n with <v, w> = v* w."""
    M = matrix_algebra(n)
    ract = np.zeros((n * n, n, n))
    inner = np.zeros((n, n, n * n))
    for i in range(n):
        for j in range(n):
            ract[i * n + j, j, i] = 1
            inner[i, j, i * n + j] = 1
    return HilbertBimodule(complex_numbers(), M, np.eye(n)[None], ract, inner)


def validate_bimodule(E: HilbertBimodule, tol: float = ATOL, samples: int = 100, seed: int = 0,
                      require_unital: bool = True, full_limit: int = 2 ** 18) -> Report:
    """Every axiom on basis elements while the structure tensors are small,
    on random elements of A and B beyond ``full_limit``."""
    report = Report()
    A, B = E.left, E.right
    e = E.dimension
    if E.lact.shape != (A.dimension, e, e) or E.ract.shape != (B.dimension, e, e) \
            or E.inner.shape != (e, e, B.dimension):
        report.add("tensor shapes")
        return report
    if e == 0:
        return report
    if A.dimension * B.dimension * e * e <= full_limit:
        _bimodule_axioms_full(E, tol, report)
    else:
        _bimodule_axioms_sampled(E, tol, report, np.random.default_rng(seed))
    w = np.linalg.eigvalsh((E.scalar_gram + E.scalar_gram.conj().T) / 2)
    if w[0] <= tol * max(1.0, w[-1]):
        report.add("inner product is nondegenerate", float(w[0]))
    if require_unital and not _close(E.left_op(A.unit), np.eye(e), tol):
        report.add("left action is unital")
    if samples and B.dimension:
        rng = np.random.default_rng(seed)
        xs = rng.standard_normal((samples, e)) + 1j * rng.standard_normal((samples, e))
        vals = np.einsum("np,nq,pqk->nk", np.conj(xs), xs, E.inner)
        lo, skew = min_eigenvalues(B, vals)
        worst = int(np.argmin(lo))
        if lo[worst] < -tol * max(1.0, float(np.abs(vals).max())):
            report.add("<xi, xi> >= 0", f"sample {worst}: min eigenvalue {lo[worst]:.3e}")
    return report


def _bimodule_axioms_full(E: HilbertBimodule, tol: float, report: Report) -> None:
    A, B = E.left, E.right
    LL = np.einsum("iab,jbc->ijac", E.lact, E.lact)
    if not _close(LL, np.einsum("ijk,kac->ijac", A.mult, E.lact), tol):
        report.add("left action is multiplicative")
    RR = np.einsum("iab,jbc->jiac", E.ract, E.ract)
    if not _close(RR, np.einsum("ijk,kac->ijac", B.mult, E.ract), tol):
        report.add("right action is multiplicative")
    if not _close(np.einsum("iab,jbc->ijac", E.lact, E.ract), np.einsum("jab,ibc->ijac", E.ract, E.lact), tol):
        report.add("left and right actions commute")
    lhs = np.einsum("jxq,pxk->pqjk", E.ract, E.inner)
    rhs = np.einsum("pqi,ijk->pqjk", E.inner, B.mult)
    if not _close(lhs, rhs, tol):
        report.add("<xi, eta.b> = <xi, eta> b")
    if not _close(np.einsum("kl,pql->qpk", B.star, np.conj(E.inner)), E.inner, tol):
        report.add("<xi, eta>* = <eta, xi>")
    lstar = np.einsum("ji,jab->iab", A.star, E.lact)  # operator of e_i*
    lhs = np.einsum("ixp,xqk->ipqk", np.conj(E.lact), E.inner)
    rhs = np.einsum("ixq,pxk->ipqk", lstar, E.inner)
    if not _close(lhs, rhs, tol):
        report.add("<a.xi, eta> = <xi, a*.eta>")


def _bimodule_axioms_sampled(E: HilbertBimodule, tol: float, report: Report, rng, probes: int = 6) -> None:
    A, B = E.left, E.right
    e = E.dimension

    def coeffs(n):
        return rng.standard_normal((probes, n)) + 1j * rng.standard_normal((probes, n))

    a1, a2, b1, b2 = coeffs(A.dimension), coeffs(A.dimension), coeffs(B.dimension), coeffs(B.dimension)
    xs, ys = coeffs(e), coeffs(e)
    La1, La2 = np.einsum("ni,iab->nab", a1, E.lact), np.einsum("ni,iab->nab", a2, E.lact)
    Rb1, Rb2 = np.einsum("ni,iab->nab", b1, E.ract), np.einsum("ni,iab->nab", b2, E.ract)
    prod_a = np.einsum("ni,nj,ijk->nk", a1, a2, A.mult, optimize=True)
    prod_b = np.einsum("ni,nj,ijk->nk", b1, b2, B.mult, optimize=True)
    if not _close(La1 @ La2, np.einsum("nk,kab->nab", prod_a, E.lact), tol * max(1.0, np.abs(La1).max() ** 2)):
        report.add("left action is multiplicative")
    # R(b1 b2) = R(b2) R(b1)
    if not _close(Rb2 @ Rb1, np.einsum("nk,kab->nab", prod_b, E.ract), tol * max(1.0, np.abs(Rb1).max() ** 2)):
        report.add("right action is multiplicative")
    if not _close(La1 @ Rb1, Rb1 @ La1, tol * max(1.0, np.abs(La1).max() * np.abs(Rb1).max())):
        report.add("left and right actions commute")

    def inner(x, y):
        return np.einsum("np,nq,pqk->nk", np.conj(x), y, E.inner)

    scale = max(1.0, float(np.abs(inner(xs, xs)).max()))
    big = scale * max(1.0, float(np.abs(b1).max()), float(np.abs(a1).max())) * 10
    yb = np.einsum("nab,nb->na", Rb1, ys)
    lhs = inner(xs, yb)
    rhs = np.einsum("ni,nj,ijk->nk", inner(xs, ys), b1, B.mult, optimize=True)
    if not _close(lhs, rhs, tol * big):
        report.add("<xi, eta.b> = <xi, eta> b")
    if not _close(np.einsum("kl,nl->nk", B.star, np.conj(inner(ys, xs))), inner(xs, ys), tol * big):
        report.add("<xi, eta>* = <eta, xi>")
    a_star = np.einsum("ji,nj->ni", A.star, np.conj(a1))
    La_star = np.einsum("ni,iab->nab", a_star, E.lact)
    lhs = inner(np.einsum("nab,nb->na", La1, xs), ys)
    rhs = inner(xs, np.einsum("nab,nb->na", La_star, ys))
    if not _close(lhs, rhs, tol * big):
        report.add("<a.xi, eta> = <xi, a*.eta>")


# -- operators between modules ----------------------------------------------------


def adjoint_operator(E: HilbertBimodule, F: HilbertBimodule, T: np.ndarray) -> np.ndarray:
    """Adjoint of an adjointable map T: E -> F."""
    return np.linalg.solve(E.scalar_gram, T.conj().T @ F.scalar_gram)


def _intertwiner_constraints(ops_e, ops_f) -> np.ndarray:
    e = ops_e.shape[1]
    f = ops_f.shape[1]
    return np.concatenate([
        np.kron(np.eye(f), Re.T) - np.kron(Rf, np.eye(e)) for Re, Rf in zip(ops_e, ops_f)
    ]) if len(ops_e) else np.zeros((0, e * f))


def module_maps(E: HilbertBimodule, F: HilbertBimodule) -> list[np.ndarray]:
    """Basis of right-module maps E -> F (all adjointable here)."""
    e, f = E.dimension, F.dimension
    N = nullspace(_intertwiner_constraints(E.ract, F.ract))
    return [N[:, k].reshape(f, e) for k in range(N.shape[1])]


def bimodule_maps(E: HilbertBimodule, F: HilbertBimodule) -> list[np.ndarray]:
    e, f = E.dimension, F.dimension
    M = np.concatenate([
        _intertwiner_constraints(E.ract, F.ract), _intertwiner_constraints(E.lact, F.lact)
    ])
    N = nullspace(M)
    return [N[:, k].reshape(f, e) for k in range(N.shape[1])]


def find_bimodule_isomorphism(E: HilbertBimodule, F: HilbertBimodule, seed: int = 0,
                              tol: float = ATOL) -> np.ndarray | None:
    """A unitary bimodule map E -> F, or None when none exists."""
    if E.dimension != F.dimension or E.left != F.left or E.right != F.right:
        return None
    if E.dimension == 0:
        return np.zeros((0, 0), dtype=complex)
    basis = bimodule_maps(E, F)
    if not basis:
        return None
    rng = np.random.default_rng(seed)
    for _ in range(4):
        coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        T = sum(c * b for c, b in zip(coeffs, basis))
        if numerical_rank(T) == E.dimension:
            break
    else:
        return None
    root, inv_root = _psd_powers(E.scalar_gram)
    P = root @ adjoint_operator(E, F, T) @ T @ inv_root
    w, v = np.linalg.eigh((P + P.conj().T) / 2)
    S = inv_root @ ((v / np.sqrt(w)) @ v.conj().T) @ root
    U = T @ S
    lhs = np.einsum("ap,bq,abk->pqk", np.conj(U), U, F.inner)
    return U if _close(lhs, E.inner, 1e-6) else None


# -- interior tensor products ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InteriorTensor(HilbertBimodule):
    """``E ⊗_B F`` with ``lift`` mapping quotient coordinates to orthonormal
    representatives in the algebraic tensor product (index p * dim F + r)."""

    lift: np.ndarray = None  # type: ignore[assignment]
    factors: tuple[HilbertBimodule, HilbertBimodule] = None  # type: ignore[assignment]


def algebraic_tensor_gram(E: HilbertBimodule, F: HilbertBimodule) -> np.ndarray:
    """Scalar form tau_C(<f_r, <e_p, e_q> . f_s>) on E ⊗ F."""
    TF = F.inner @ F.right.trace
    TFL = np.einsum("rx,kxs->krs", TF, F.lact)
    e, f = E.dimension, F.dimension
    return np.einsum("pqk,krs->prqs", E.inner, TFL).reshape(e * f, e * f)


def tensor_inner(E: HilbertBimodule, F: HilbertBimodule, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """C-valued inner products between the columns of X and Y, both given in
    algebraic tensor coordinates."""
    e, f = E.dimension, F.dimension
    Wx = X.T.reshape(-1, e, f)
    Wy = Y.T.reshape(-1, e, f)
    Z = np.einsum("pqk,kxs,bqs->bpx", E.inner, F.lact, Wy, optimize=True)
    return np.einsum("apr,bpx,rxc->abc", np.conj(Wx), Z, F.inner, optimize=True)


def tensor_product(E: HilbertBimodule, F: HilbertBimodule) -> InteriorTensor:
    if E.right != F.left:
        raise ValueError("middle algebras differ")
    e, f = E.dimension, F.dimension
    if e * f == 0:
        V = np.zeros((e * f, 0), dtype=complex)
    else:
        gram = algebraic_tensor_gram(E, F)
        w, v = np.linalg.eigh((gram + gram.conj().T) / 2)
        keep = w > RANK_RTOL * max(w[-1], 0)
        V = v[:, keep]
    Vh = V.conj().T
    eye_f, eye_e = np.eye(f), np.eye(e)
    lact = np.array([Vh @ np.kron(L, eye_f) @ V for L in E.lact]).reshape(E.left.dimension, V.shape[1], V.shape[1])
    ract = np.array([Vh @ np.kron(eye_e, R) @ V for R in F.ract]).reshape(F.right.dimension, V.shape[1], V.shape[1])
    inner = tensor_inner(E, F, V, V) if V.shape[1] else np.zeros((0, 0, F.right.dimension))
    return InteriorTensor(E.left, F.right, lact, ract, inner, lift=V, factors=(E, F))


# -- K-theory maps ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class K0Map:
    """Integer matrix ``K_0(source) -> K_0(target)``; column i is the image
    of the class of a minimal projection in block i of the source."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix, dtype=np.int64))

    def __matmul__(self, other: "K0Map") -> "K0Map":
        return K0Map(self.matrix @ other.matrix)

    def __eq__(self, other) -> bool:
        if not isinstance(other, K0Map):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and bool(np.array_equal(self.matrix, other.matrix))

    __hash__ = object.__hash__

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def is_identity(self) -> bool:
        r, c = self.matrix.shape
        return r == c and bool(np.array_equal(self.matrix, np.eye(r, dtype=np.int64)))

    def is_invertible(self) -> bool:
        r, c = self.matrix.shape
        if r != c:
            return False
        if r == 0:
            return True
        return abs(round(_integer_det(self.matrix))) == 1

    def tolist(self) -> list[list[int]]:
        return self.matrix.tolist()


def _integer_det(M: np.ndarray) -> int:
    from fractions import Fraction

    A = [[Fraction(int(x)) for x in row] for row in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return int(det)


class MultiplicityError(RuntimeError):
    pass


def k0_map(E: HilbertBimodule) -> K0Map:
    """Multiplicities M[j, i] = dim(z_i E w_j) / (a_i b_j)."""
    PA, PB = E.left.blocks, E.right.blocks
    M = np.zeros((PB.rank, PA.rank), dtype=np.int64)
    total = 0
    for i, (z, a) in enumerate(zip(PA.projections, PA.block_dims)):
        Lz = E.left_op(z)
        for j, (w, b) in enumerate(zip(PB.projections, PB.block_dims)):
            dim = numerical_rank(Lz @ E.right_op(w))
            q = dim / (a * b)
            if abs(q - round(q)) > ROUND_TOL:
                raise MultiplicityError(f"non-integer multiplicity {q} at blocks ({i}, {j})")
            M[j, i] = round(q)
            total += M[j, i] * a * b
    expected = numerical_rank(E.left_op(E.left.unit)) if E.dimension else 0
    if total != expected:
        raise MultiplicityError(f"multiplicities account for {total} of {expected} dimensions")
    return K0Map(M)
