"""Classical ground truth: spectra, kernel dimensions, homology oracle, Betti tables."""
from __future__ import annotations

import json
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from . import _rational
from .complexes import FiltrationContext, enumerate_basis
from .errors import NotSquare, NotSymmetric, ScaleOrder, TooLarge
from .operators import DiracOperator, SparseOperator, Variant, boundary

MAX_DENSE_DIM = 4096
KERNEL_TOL = 1e-8
CLUSTER_TOL = 1e-9


def _dense_of(op) -> np.ndarray:
    if isinstance(op, DiracOperator):
        return op.to_dense()
    if isinstance(op, SparseOperator):
        return op.to_dense()
    raise TypeError(f"expected SparseOperator or DiracOperator, got {type(op).__name__}")


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues clustered at a tolerance, with their multiplicities."""

    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int, ...]
    tol: float

    @property
    def dim(self) -> int:
        return sum(self.multiplicities)

    def items(self):
        return list(zip(self.eigenvalues, self.multiplicities))

    def multiplicity_at(self, value: float, tol: float | None = None) -> int:
        tol = self.tol if tol is None else tol
        return sum(m for v, m in self.items() if abs(v - value) <= tol)


def spectrum(op, tol: float = CLUSTER_TOL) -> Spectrum:
    """Full dense eigendecomposition with eigenvalues clustered at `tol`."""
    m = _dense_of(op)
    if m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"operator of shape {m.shape} is not symmetric")
    if m.shape[0] > MAX_DENSE_DIM:
        raise TooLarge(f"dimension {m.shape[0]} exceeds dense cap {MAX_DENSE_DIM}")
    if m.size and not np.allclose(m, m.T, atol=1e-12, rtol=0.0):
        raise NotSymmetric("operator is not symmetric")
    if m.size == 0:
        return Spectrum((), (), tol)
    vals = np.linalg.eigvalsh(m)
    clustered: list[list] = []
    for v in vals:
        if clustered and v - clustered[-1][0] <= tol:
            clustered[-1][1] += 1
            clustered[-1][0] = v  # gap rule: compare against the latest member
        else:
            clustered.append([float(v), 1])
    # report the mean of each cluster
    means = []
    i = 0
    for _, mult in clustered:
        means.append(float(vals[i:i + mult].mean()))
        i += mult
    return Spectrum(tuple(means), tuple(m for _, m in clustered), tol)


def kernel_dimension(op, mode: str = "float", tol: float = KERNEL_TOL) -> int:
    """Kernel dimension, by thresholded eigenvalues or by exact rational rank.

    Float mode counts eigenvalues below `tol` scaled by the spectral radius
    (with an absolute floor of `tol`); exact mode computes dimension minus
    rank over Q and needs the operator to carry exact data.
    """
    if mode in ("exact", "exact_rational"):
        if isinstance(op, SparseOperator) and op.kernel_stack is not None:
            return op.shape[1] - _rational.rank([list(r) for r in op.kernel_stack])
        if isinstance(op, SparseOperator) and op.int_entries is not None:
            return op.shape[1] - _rational.rank(op.int_dense())
        raise ValueError("exact mode needs an operator with exact entries")
    if mode != "float":
        raise ValueError(f"unknown mode {mode!r}")
    m = _dense_of(op)
    if m.shape[0] != m.shape[1]:
        raise NotSquare(f"kernel dimension needs a square operator, got {m.shape}")
    if m.size == 0:
        return 0
    vals = np.linalg.eigvalsh(m)
    scale = float(np.abs(vals).max())
    thresh = tol * max(1.0, scale)
    return int((np.abs(vals) < thresh).sum())


def betti_homology_oracle(k: int, eps: float, eps_prime: float,
                          ctx: FiltrationContext) -> int:
    """Persistent Betti number by exact rational ranks.

    Computes dim ker(d_k at eps) minus the dimension of the intersection of
    im(d_{k+1} at eps') with that kernel, the image first being cut down to
    the coordinate subspace of the scale-eps k-chains. Independent of the
    Laplacian pipeline; used as the ground-truth oracle.
    """
    if eps > eps_prime:
        raise ScaleOrder(f"eps={eps} > eps'={eps_prime}")
    basis_k = enumerate_basis(k, eps, ctx)
    basis_km1 = enumerate_basis(k - 1, eps, ctx)
    d_k = boundary(k, basis_km1, basis_k).int_dense()
    n_k = len(basis_k)
    ker_basis = _rational.nullspace_int(d_k, n_k)
    ker_dim = len(ker_basis)
    if ker_dim == 0:
        return 0

    basis_k_prime = enumerate_basis(k, eps_prime, ctx)
    basis_kp1 = enumerate_basis(k + 1, eps_prime, ctx)
    d_up = boundary(k + 1, basis_k_prime, basis_kp1).int_dense()
    forbidden = [i for i, m in enumerate(basis_k_prime.masks) if m not in basis_k.index]
    coef = _rational.nullspace_int([d_up[i] for i in forbidden], len(basis_kp1))
    if not coef:
        return ker_dim
    # image columns restricted to the coordinate subspace, in scale-eps coordinates
    image = _rational.matmul(d_up, _rational.transpose(coef))
    rows_keep = [basis_k_prime.index[m] for m in basis_k.masks]
    image_cols = _rational.transpose([image[i] for i in rows_keep])
    dim_image = _rational.rank(image_cols)
    dim_sum = _rational.rank(image_cols + ker_basis)
    # dim(V n K) = dim V + dim K - dim(V + K)
    return dim_sum - dim_image


@dataclass(frozen=True)
class BettiTable:
    """Persistent Betti numbers over a scale grid, keyed by (k, i, j) with i <= j."""

    scales: tuple[float, ...]
    entries: MappingProxyType

    def __getitem__(self, key) -> int:
        return self.entries[key]

    def __len__(self) -> int:
        return len(self.entries)

    def to_json_dict(self, k: int) -> dict:
        betti = {f"{i},{j}": v for (kk, i, j), v in sorted(self.entries.items()) if kk == k}
        return {"k": k, "scales": list(self.scales), "betti": betti}

    def to_json(self, k: int) -> str:
        return json.dumps(self.to_json_dict(k), sort_keys=True)


def betti_table(ctx: FiltrationContext, k_max: int, scales,
                variant: Variant = Variant.CHAIN_RESTRICTED,
                mode: str = "float") -> BettiTable:
    """Persistent Betti numbers for all scale pairs i <= j and all k <= k_max."""
    scales = tuple(float(s) for s in scales)
    if list(scales) != sorted(scales):
        raise ScaleOrder("scales must be sorted ascending")
    from .operators import persistent_laplacian
    entries = {}
    for k in range(k_max + 1):
        for i in range(len(scales)):
            for j in range(i, len(scales)):
                lap = persistent_laplacian(k, scales[i], scales[j], ctx, variant)
                entries[(k, i, j)] = kernel_dimension(lap, mode)
    return BettiTable(scales=scales, entries=MappingProxyType(entries))
