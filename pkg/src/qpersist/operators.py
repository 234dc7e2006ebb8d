"""Boundary maps, projectors, persistent Laplacians, and persistent Dirac operators.

All operators are real matrices over explicit simplex bases in canonical
(ascending-mask) order. The boundary of a k-simplex is the alternating sum
of its faces, the face losing the l-th vertex (ascending order) carrying
sign (-1)^l. Restricting an operator to smaller-scale bases silently drops
the faces that fall outside them, which is exactly the action of the
scale projector.

The persistent Dirac operator for a scale pair (eps, eps') is the Hermitian
block matrix

        [ -xi*I    d_k      0     ]
        [ d_k^T   +xi*I    d_up   ]
        [ 0       d_up^T  -xi*I   ]

over the (k-1)-simplices at eps, the k-simplices at eps, and a third block
that depends on the variant: the (k+1)-simplices at eps' with their
boundaries projected to scale eps (`Variant.PROJECTED`), or an orthonormal
basis of the (k+1)-chains at eps' whose full boundary already lies at
scale eps (`Variant.CHAIN_RESTRICTED`). The square of this matrix contains
the persistent Laplacian shifted by xi^2 in its middle diagonal block, so
the multiplicity of the eigenvalue +xi equals the Laplacian's kernel
dimension, the persistent Betti number.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from . import _rational
from .complexes import FiltrationContext, SimplexBasis, enumerate_basis, mask_vertices
from .errors import DimensionMismatch, NotASubset, ScaleOrder, ZeroXi


class Variant(Enum):
    PROJECTED = "projected"
    CHAIN_RESTRICTED = "chain"


def _describe_basis(basis) -> str:
    if isinstance(basis, SimplexBasis):
        return f"S(k={basis.k},eps={basis.epsilon!r},dim={len(basis)})"
    if isinstance(basis, ChainBasis):
        return f"Z(k={basis.k},eps={basis.eps!r},eps'={basis.eps_prime!r},dim={len(basis)})"
    return f"basis(dim={len(basis)})"


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """A real sparse matrix between two indexed bases."""

    rows: object
    cols: object
    matrix: sp.csr_matrix
    int_entries: tuple | None = None   # (i, j, int) triples when entries are integers
    kernel_stack: tuple | None = None  # exact rows whose null space equals ker(self)

    def __post_init__(self):
        m = self.matrix.tocsr()
        m.eliminate_zeros()
        m.sort_indices()
        if m.shape != (len(self.rows), len(self.cols)):
            raise DimensionMismatch(
                f"matrix shape {m.shape} does not match bases "
                f"({len(self.rows)}, {len(self.cols)})")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_dense(cls, dense, rows=None, cols=None) -> "SparseOperator":
        dense = np.asarray(dense, dtype=float)
        if rows is None:
            rows = tuple(range(dense.shape[0]))
        if cols is None:
            cols = tuple(range(dense.shape[1]))
        ints = None
        if dense.size == 0 or np.all(dense == np.round(dense)):
            coo = sp.coo_matrix(dense)
            ints = tuple((int(i), int(j), int(v)) for i, j, v in zip(coo.row, coo.col, coo.data))
        return cls(rows=rows, cols=cols, matrix=sp.csr_matrix(dense), int_entries=ints)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def entries(self):
        """(row, col, value) triples in row-major order."""
        coo = self.matrix.tocoo()
        return [(int(i), int(j), float(v)) for i, j, v in zip(coo.row, coo.col, coo.data)]

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def int_dense(self) -> list[list[int]]:
        if self.int_entries is None:
            raise ValueError("operator has no exact integer entries")
        nr, nc = self.shape
        out = [[0] * nc for _ in range(nr)]
        for i, j, v in self.int_entries:
            out[i][j] = v
        return out

    def dump(self) -> str:
        """Coordinate-list text: a header naming the bases, then `row col value` lines."""
        lines = [f"# rows {_describe_basis(self.rows)} | cols {_describe_basis(self.cols)}"]
        lines += [f"{i} {j} {v!r}" for i, j, v in self.entries()]
        return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class ChainBasis:
    """Orthonormal basis of the chains at scale eps' whose boundary lies at scale eps.

    `vectors` holds the orthonormal columns in the coordinates of the
    ambient simplex basis; `exact_vectors` is the integer-scaled rational
    basis of the same subspace that the columns were orthonormalized from.
    """

    k: int
    eps: float
    eps_prime: float
    ambient: SimplexBasis
    vectors: np.ndarray
    exact_vectors: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return self.vectors.shape[1]


def boundary(k: int, rows: SimplexBasis, cols: SimplexBasis) -> SparseOperator:
    """The boundary map on the `cols` k-simplices, expressed in the `rows` basis.

    Faces missing from the row basis are dropped, so calling this with a
    smaller-scale row basis directly yields the projected boundary.
    """
    if rows.k != k - 1 or cols.k != k:
        raise DimensionMismatch(
            f"boundary({k}) needs row basis of dimension {k - 1} and column basis "
            f"of dimension {k}, got {rows.k} and {cols.k}")
    ri, ci, data, ints = [], [], [], []
    for j, mask in enumerate(cols.masks):
        for l, v in enumerate(mask_vertices(mask)):
            i = rows.index.get(mask ^ (1 << v))
            if i is not None:
                sign = -1 if l & 1 else 1
                ri.append(i)
                ci.append(j)
                data.append(float(sign))
                ints.append((i, j, sign))
    matrix = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), len(cols)))
    return SparseOperator(rows=rows, cols=cols, matrix=matrix, int_entries=tuple(ints))


def projector(basis_sub: SimplexBasis, basis_full: SimplexBasis) -> SparseOperator:
    """Diagonal 0/1 matrix on `basis_full` selecting the members of `basis_sub`."""
    for m in basis_sub.masks:
        if m not in basis_full.index:
            raise NotASubset(f"mask {m:#b} not in the full basis")
    n = len(basis_full)
    idx = [basis_full.index[m] for m in basis_sub.masks]
    data = np.ones(len(idx))
    matrix = sp.csr_matrix((data, (idx, idx)), shape=(n, n))
    ints = tuple((i, i, 1) for i in sorted(idx))
    return SparseOperator(rows=basis_full, cols=basis_full, matrix=matrix, int_entries=ints)


def restricted_boundary_projected(k: int, eps: float, eps_prime: float,
                                  ctx: FiltrationContext) -> SparseOperator:
    """Boundary of the scale-eps' k-simplices with faces outside scale eps deleted."""
    if eps > eps_prime:
        raise ScaleOrder(f"eps={eps} > eps'={eps_prime}")
    rows = enumerate_basis(k - 1, eps, ctx)
    cols = enumerate_basis(k, eps_prime, ctx)
    return boundary(k, rows, cols)


def chain_restricted_boundary(k: int, eps: float, eps_prime: float,
                              ctx: FiltrationContext) -> tuple[ChainBasis, SparseOperator]:
    """Boundary restricted to the k-chains at eps' whose boundary lies at eps.

    The subspace is the rational null space of the rows of the full
    boundary matrix indexed by faces outside the scale-eps complex. Returns
    the orthonormalized subspace basis and the boundary restricted to it,
    expressed in the coordinates of the (k-1)-simplices at eps.
    """
    if eps > eps_prime:
        raise ScaleOrder(f"eps={eps} > eps'={eps_prime}")
    cols_full = enumerate_basis(k, eps_prime, ctx)
    rows_full = enumerate_basis(k - 1, eps_prime, ctx)
    rows_keep = enumerate_basis(k - 1, eps, ctx)
    full = boundary(k, rows_full, cols_full)
    dense_int = full.int_dense()
    forbidden = [i for i, m in enumerate(rows_full.masks) if m not in rows_keep.index]
    ncols = len(cols_full)
    null_vectors = _rational.nullspace_int([dense_int[i] for i in forbidden], ncols)
    z = len(null_vectors)
    if z:
        zf = np.array(null_vectors, dtype=float).T  # ncols x z
        q, _ = np.linalg.qr(zf)
    else:
        q = np.zeros((ncols, 0))
    zbasis = ChainBasis(k=k, eps=eps, eps_prime=eps_prime, ambient=cols_full,
                        vectors=q, exact_vectors=tuple(tuple(v) for v in null_vectors))
    keep_idx = [rows_full.index[m] for m in rows_keep.masks]
    restricted = full.matrix[keep_idx, :] @ q if keep_idx else np.zeros((0, z))
    op = SparseOperator(rows=rows_keep, cols=zbasis, matrix=sp.csr_matrix(restricted))
    return zbasis, op


def _exact_up_coupling(k: int, eps: float, eps_prime: float, ctx: FiltrationContext,
                       zbasis: ChainBasis) -> list[list[int]]:
    """Exact integer matrix of the chain-restricted (k+1)-coupling, rows at scale eps."""
    rows_keep = enumerate_basis(k, eps, ctx)
    full = boundary(k + 1, rows_keep, zbasis.ambient)
    zcols = _rational.transpose([list(v) for v in zbasis.exact_vectors])
    return _rational.matmul(full.int_dense(), zcols)


def persistent_laplacian(k: int, eps: float, eps_prime: float, ctx: FiltrationContext,
                         variant: Variant = Variant.CHAIN_RESTRICTED) -> SparseOperator:
    """Symmetric PSD operator on the k-simplices at eps whose kernel dimension is
    the persistent Betti number (down-term plus the variant's up-term)."""
    if eps > eps_prime:
        raise ScaleOrder(f"eps={eps} > eps'={eps_prime}")
    b0 = enumerate_basis(k, eps, ctx)
    bm = enumerate_basis(k - 1, eps, ctx)
    down = boundary(k, bm, b0)
    if variant is Variant.PROJECTED:
        up = restricted_boundary_projected(k + 1, eps, eps_prime, ctx)
        up_rows_t = _rational.transpose(up.int_dense())
    else:
        zbasis, up = chain_restricted_boundary(k + 1, eps, eps_prime, ctx)
        up_rows_t = _rational.transpose(_exact_up_coupling(k, eps, eps_prime, ctx, zbasis))
    lap = (down.matrix.T @ down.matrix + up.matrix @ up.matrix.T).tocsr()
    # ker(d^T d + u u^T) = ker(d) n ker(u^T): stack the factors for exact kernels
    stack = tuple(tuple(r) for r in down.int_dense()) + tuple(tuple(r) for r in up_rows_t)
    return SparseOperator(rows=b0, cols=b0, matrix=lap, kernel_stack=stack)


@dataclass(frozen=True, eq=False)
class DiracOperator:
    """Hermitian block operator pairing the restricted boundaries with a +-xi shift.

    Bases are (S_{k-1} at eps, S_k at eps, up-block), the diagonal carrying
    (-xi, +xi, -xi). With `drop_isolated`, side-block elements with all-zero
    coupling (isolated vertices, for instance) are removed; such elements
    sit on a -xi diagonal, so the +xi multiplicity is unaffected.
    """

    k: int
    eps: float
    eps_prime: float
    xi: float
    variant: Variant
    drop_isolated: bool
    basis_minus: SimplexBasis
    basis_zero: SimplexBasis
    basis_plus: object  # SimplexBasis (projected) or ChainBasis (chain-restricted)
    keep_minus: tuple[int, ...]
    keep_plus: tuple[int, ...]
    down: sp.csr_matrix  # kept rows of the restricted boundary d_k
    up: sp.csr_matrix    # kept cols of the variant's (k+1)-coupling

    @property
    def dims(self) -> tuple[int, int, int]:
        return len(self.keep_minus), len(self.basis_zero), len(self.keep_plus)

    @property
    def dim(self) -> int:
        nm, n0, npl = self.dims
        return nm + n0 + npl

    def block(self, b_row: int, b_col: int) -> sp.csr_matrix:
        """One block of the 3x3 structure, labeled by qutrit values in {-1, 0, +1}."""
        nm, n0, npl = self.dims
        sizes = {-1: nm, 0: n0, 1: npl}
        if b_row not in sizes or b_col not in sizes:
            raise ValueError("block labels must be -1, 0, or +1")
        if b_row == b_col:
            sign = 1.0 if b_row == 0 else -1.0
            return sp.identity(sizes[b_row], format="csr") * (sign * self.xi)
        if (b_row, b_col) == (-1, 0):
            return self.down
        if (b_row, b_col) == (0, -1):
            return self.down.T.tocsr()
        if (b_row, b_col) == (0, 1):
            return self.up
        if (b_row, b_col) == (1, 0):
            return self.up.T.tocsr()
        return sp.csr_matrix((sizes[b_row], sizes[b_col]))

    def to_dense(self) -> np.ndarray:
        nm, n0, npl = self.dims
        n = nm + n0 + npl
        out = np.zeros((n, n))
        out[:nm, :nm] = -self.xi * np.eye(nm)
        out[nm:nm + n0, nm:nm + n0] = self.xi * np.eye(n0)
        out[nm + n0:, nm + n0:] = -self.xi * np.eye(npl)
        d = self.down.toarray()
        u = self.up.toarray()
        out[:nm, nm:nm + n0] = d
        out[nm:nm + n0, :nm] = d.T
        out[nm:nm + n0, nm + n0:] = u
        out[nm + n0:, nm:nm + n0] = u.T
        return out


def persistent_dirac(k: int, eps: float, eps_prime: float, xi: float,
                     ctx: FiltrationContext, variant: Variant = Variant.PROJECTED,
                     drop_isolated: bool = False) -> DiracOperator:
    """Assemble the persistent Dirac operator for the scale pair (eps, eps')."""
    if eps > eps_prime:
        raise ScaleOrder(f"eps={eps} > eps'={eps_prime}")
    if xi == 0:
        raise ZeroXi("xi must be nonzero to separate the +-xi eigenspaces")
    basis_minus = enumerate_basis(k - 1, eps, ctx)
    basis_zero = enumerate_basis(k, eps, ctx)
    down = boundary(k, basis_minus, basis_zero)
    if variant is Variant.PROJECTED:
        basis_plus = enumerate_basis(k + 1, eps_prime, ctx)
        up = boundary(k + 1, basis_zero, basis_plus)
    else:
        basis_plus, up = chain_restricted_boundary(k + 1, eps, eps_prime, ctx)
    down_m, up_m = down.matrix, up.matrix
    if drop_isolated:
        keep_minus = tuple(int(i) for i in np.flatnonzero(down_m.getnnz(axis=1)))
        keep_plus = tuple(int(j) for j in np.flatnonzero(up_m.getnnz(axis=0)))
    else:
        keep_minus = tuple(range(len(basis_minus)))
        keep_plus = tuple(range(len(basis_plus)))
    down_kept = down_m[list(keep_minus), :] if keep_minus else sp.csr_matrix((0, len(basis_zero)))
    up_kept = up_m[:, list(keep_plus)] if keep_plus else sp.csr_matrix((len(basis_zero), 0))
    return DiracOperator(k=k, eps=eps, eps_prime=eps_prime, xi=xi, variant=variant,
                         drop_isolated=drop_isolated, basis_minus=basis_minus,
                         basis_zero=basis_zero, basis_plus=basis_plus,
                         keep_minus=keep_minus, keep_plus=keep_plus,
                         down=down_kept.tocsr(), up=up_kept.tocsr())


def dirac_square_check(B: DiracOperator, L: SparseOperator, tol: float) -> bool:
    """Whether the middle diagonal block of B^2 equals L + xi^2 * I within tol."""
    nm, n0, npl = B.dims
    if L.shape != (n0, n0):
        raise DimensionMismatch(f"Laplacian shape {L.shape} does not match middle block {n0}")
    if isinstance(L.rows, SimplexBasis) and L.rows.masks != B.basis_zero.masks:
        raise DimensionMismatch("Laplacian basis differs from the Dirac middle basis")
    if n0 == 0:
        return True
    sq = B.to_dense()
    sq = sq @ sq
    mid = sq[nm:nm + n0, nm:nm + n0]
    target = L.to_dense() + B.xi ** 2 * np.eye(n0)
    return float(np.abs(mid - target).max()) <= tol
