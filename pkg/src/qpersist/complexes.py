"""Bitmask simplex encoding and Vietoris-Rips bases.

A k-simplex on n vertices is an n-bit mask with k+1 set bits, one per
vertex. A simplex belongs to the scale-eps complex iff its diameter (the
largest pairwise distance among its vertices) is <= eps, so membership of
any simplex reduces to membership of its edges.
"""
from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .errors import EmptyMask
from .geometry import DistanceMatrix, PointCloud, distance_matrix

SimplexMask = int


def mask_vertices(mask: SimplexMask) -> tuple[int, ...]:
    """Set bit positions in ascending order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def mask_from_vertices(vertices) -> SimplexMask:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def simplex_diameter(mask: SimplexMask, dmat: DistanceMatrix) -> float:
    """Largest pairwise distance among the simplex's vertices; 0 for a vertex."""
    if mask == 0:
        raise EmptyMask("simplex mask has no vertices")
    verts = mask_vertices(mask)
    d = 0.0
    for a in range(1, len(verts)):
        for b in range(a):
            d = max(d, dmat.values[verts[a], verts[b]])
    return d


def vr_membership(mask: SimplexMask, epsilon: float, dmat: DistanceMatrix) -> bool:
    """Whether the simplex lies in the scale-epsilon complex.

    The comparison is an exact <=; a simplex whose diameter equals epsilon
    is a member, which keeps nesting across scales exact.
    """
    return simplex_diameter(mask, dmat) <= epsilon


@dataclass(frozen=True)
class SimplexBasis:
    """The ordered basis S_k at one scale: all k-simplices of the complex.

    Masks are sorted by integer value (the canonical order), and `index`
    inverts the list.
    """

    k: int
    epsilon: float
    masks: tuple[SimplexMask, ...]
    index: MappingProxyType

    @classmethod
    def from_masks(cls, k: int, epsilon: float, masks) -> "SimplexBasis":
        masks = tuple(sorted(masks))
        index = MappingProxyType({m: i for i, m in enumerate(masks)})
        return cls(k=k, epsilon=epsilon, masks=masks, index=index)

    def __len__(self) -> int:
        return len(self.masks)

    def __contains__(self, mask: SimplexMask) -> bool:
        return mask in self.index

    def dump(self) -> str:
        """One line per simplex: sorted comma-separated vertex indices."""
        return "\n".join(",".join(map(str, mask_vertices(m))) for m in self.masks)


@dataclass(frozen=True)
class FiltrationContext:
    """A point cloud together with its distances and critical scales."""

    cloud: PointCloud
    dmat: DistanceMatrix
    critical_scales: tuple[float, ...]

    @classmethod
    def from_cloud(cls, cloud: PointCloud) -> "FiltrationContext":
        dmat = distance_matrix(cloud)
        return cls(cloud=cloud, dmat=dmat, critical_scales=tuple(critical_scales(dmat)))

    @property
    def n(self) -> int:
        return self.cloud.n

    def diameter(self) -> float:
        return self.critical_scales[-1] if self.critical_scales else 0.0


def critical_scales(dmat: DistanceMatrix) -> list[float]:
    """Sorted distinct off-diagonal distances; the scales where the complex changes."""
    n = dmat.n
    vals = {float(dmat.values[i, j]) for i in range(n) for j in range(i + 1, n)}
    return sorted(vals)


def _gosper_masks(n: int, bits: int):
    """All n-bit masks with `bits` set bits, in ascending integer order."""
    if bits == 0 or bits > n:
        return
    m = (1 << bits) - 1
    top = 1 << n
    while m < top:
        yield m
        c = m & -m
        r = m + c
        m = (((r ^ m) >> 2) // c) | r


def enumerate_basis(k: int, epsilon: float, ctx: FiltrationContext) -> SimplexBasis:
    """All k-simplices of the scale-epsilon complex, in canonical order.

    Iterates masks of popcount k+1 and prunes by edge membership: a simplex
    is in the complex iff every vertex pair is within epsilon.
    """
    n = ctx.n
    if k < 0 or k >= n:
        return SimplexBasis.from_masks(k, epsilon, ())
    # adj[i] has bit j set iff d(i, j) <= epsilon (j != i)
    within = (ctx.dmat.values <= epsilon)
    np.fill_diagonal(within, False)
    adj = [int(sum(1 << j for j in np.flatnonzero(within[i]))) for i in range(n)]
    masks = []
    for m in _gosper_masks(n, k + 1):
        rest = m
        ok = True
        while rest:
            low = rest & -rest
            i = low.bit_length() - 1
            if (m & ~adj[i]) != low:  # some other member not adjacent to i
                ok = False
                break
            rest ^= low
        if ok:
            masks.append(m)
    return SimplexBasis.from_masks(k, epsilon, masks)


def empty_basis(k: int, epsilon: float) -> SimplexBasis:
    return SimplexBasis.from_masks(k, epsilon, ())
