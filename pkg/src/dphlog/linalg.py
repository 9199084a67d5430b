"""Exact linear algebra helpers over Z, Q and Z/p."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix


def det_int(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    a = [[int(x) for x in row] for row in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _domain_matrix(rows, domain):
    rows = [list(r) for r in rows]
    ncols = len(rows[0]) if rows else 0
    conv = domain.convert
    return DomainMatrix([[conv(x) for x in r] for r in rows], (len(rows), ncols), domain)


def rank_exact(rows: Sequence[Sequence[int | Fraction]]) -> int:
    if not rows:
        return 0
    is_int = all(isinstance(x, (int, np.integer)) for r in rows for x in r)
    if is_int:
        rows = [[int(x) for x in r] for r in rows]
    return _domain_matrix(rows, ZZ if is_int else QQ).convert_to(QQ).rank()


def nullspace_exact(rows: Sequence[Sequence[int | Fraction]], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {v : A v = 0} over Q, as lists of Fractions."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    m = _domain_matrix([[Fraction(x) for x in r] for r in rows], QQ)
    basis = m.nullspace().to_Matrix()
    out = []
    for i in range(basis.rows):
        out.append([Fraction(int(x.p), int(x.q)) for x in basis.row(i)])
    return out


def rank_mod_p(a: np.ndarray, p: int = 2_147_483_647) -> int:
    """Rank of an integer matrix modulo a prime below 2**31."""
    m = np.array(a, dtype=np.int64) % p
    nrows, ncols = m.shape
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        nz = np.nonzero(m[rank:, col])[0]
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            m[[rank, piv]] = m[[piv, rank]]
        inv = pow(int(m[rank, col]), p - 2, p)
        m[rank] = (m[rank] * inv) % p
        below = m[rank + 1:, col].copy()
        rows = np.nonzero(below)[0] + rank + 1
        if rows.size:
            # values stay below 2**62 since both factors are reduced mod p < 2**31
            m[rows] = (m[rows] - (m[rows, col][:, None] * m[rank][None, :]) % p) % p
        rank += 1
    return rank
