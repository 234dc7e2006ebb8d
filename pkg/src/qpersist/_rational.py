"""Exact linear algebra over the rationals for small dense matrices.

Matrices are lists of rows with int or Fraction entries. Row operations
keep everything in integers where possible (rank) and fall back to
Fractions only for reduced echelon form (nullspace). Adequate for the
desk-scale operators this package builds; not a general-purpose kernel.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm


def _scale_rows_to_int(rows) -> list[list[int]]:
    """Scale each row by the lcm of its denominators; preserves row space."""
    out = []
    for r in rows:
        mult = 1
        for x in r:
            if isinstance(x, Fraction):
                mult = lcm(mult, x.denominator)
        if mult == 1:
            out.append([int(x) for x in r])
        else:
            out.append([int(x * mult) for x in r])
    return out


def rank(rows) -> int:
    """Rank over Q via integer Gaussian elimination with gcd stripping."""
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    m = _scale_rows_to_int(rows)
    nr, nc = len(m), len(m[0])
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        prow, pv = m[r], m[r][c]
        for i in range(r + 1, nr):
            v = m[i][c]
            if v:
                row = m[i]
                for j in range(c, nc):
                    row[j] = row[j] * pv - v * prow[j]
                g = 0
                for x in row:
                    g = gcd(g, x)
                    if g == 1:
                        break
                if g > 1:
                    for j in range(nc):
                        row[j] //= g
        r += 1
        if r == nr:
            break
    return r


def _rref(rows) -> tuple[list[list[Fraction]], list[int]]:
    m = [[Fraction(x) for x in r] for r in rows]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(nr):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return m, pivots


def nullspace_int(rows, ncols: int) -> list[list[int]]:
    """Integer-scaled basis vectors (length ncols) of the rational null space."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    m, pivots = _rref(rows)
    pivot_set = set(pivots)
    basis = []
    for fc in (c for c in range(ncols) if c not in pivot_set):
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for rr, pc in enumerate(pivots):
            v[pc] = -m[rr][fc]
        mult = 1
        for x in v:
            mult = lcm(mult, x.denominator)
        basis.append([int(x * mult) for x in v])
    return basis


def matmul(a, b) -> list[list]:
    """Exact product of two list-of-rows matrices (int/Fraction entries)."""
    if not a:
        return []
    inner = len(a[0])
    if inner and len(b) != inner:
        raise ValueError(f"shape mismatch: {len(a)}x{inner} @ {len(b)}x?")
    ncols = len(b[0]) if b else 0
    bt = [[b[i][j] for i in range(inner)] for j in range(ncols)]
    return [[sum(ra[i] * ct[i] for i in range(inner)) for ct in bt] for ra in a]


def transpose(a) -> list[list]:
    if not a:
        return []
    return [[a[i][j] for i in range(len(a))] for j in range(len(a[0]))]
