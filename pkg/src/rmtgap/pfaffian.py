"""Pfaffians of complex antisymmetric matrices at arbitrary precision.

The production path is a skew-symmetric L T L^T elimination with partial
pivoting (Pfaffian = product of the superdiagonal pivots, sign flipped per
row/column swap).  A recursive Laplace expansion serves as an independent
oracle for small matrices, and a complex LU determinant backs the
Pf(A)^2 = det(A) cross-check.
"""

from __future__ import annotations

from typing import Optional, Sequence

import gmpy2
import mpmath
from gmpy2 import mpc

from ._mp import context, mpc_to_mpc, to_mpc
from .precision import PrecisionContext

__all__ = ["pfaffian", "pfaffian_laplace", "determinant", "border_with_vector"]


def _to_internal(A: Sequence[Sequence], bits: int) -> list:
    return [[to_mpc(v, bits) for v in row] for row in A]


def _check_antisymmetric(A: list, bits: int) -> None:
    n = len(A)
    tol = gmpy2.exp2(-bits + 3)
    for j in range(n):
        if abs(A[j][j]) != 0:
            raise ValueError(f"diagonal entry ({j},{j}) is not zero")
        for k in range(j + 1, n):
            scale = max(abs(A[j][k]), abs(A[k][j]), gmpy2.mpfr(1))
            if abs(A[j][k] + A[k][j]) > tol * scale:
                raise ValueError(f"entries ({j},{k})/({k},{j}) are not antisymmetric")


def _pfaffian_ltl(A: list) -> mpc:
    """In-place skew elimination; A is a 0-indexed list of mpc lists."""
    n = len(A)
    if n == 0:
        return mpc(1)
    pf = mpc(1)
    for k in range(0, n - 1, 2):
        # pivot: largest |A[i][k]| among rows i > k
        piv_row = max(range(k + 1, n), key=lambda i: gmpy2.norm(A[i][k]))
        if piv_row != k + 1:
            A[k + 1], A[piv_row] = A[piv_row], A[k + 1]
            for row in A:
                row[k + 1], row[piv_row] = row[piv_row], row[k + 1]
            pf = -pf
        piv = A[k][k + 1]
        if piv == 0:
            return mpc(0)
        pf *= piv
        if k + 2 >= n:
            break
        tau = [A[k][j] / piv for j in range(k + 2, n)]
        col = [A[i][k + 1] for i in range(k + 2, n)]
        for ii in range(k + 2, n):
            arow = A[ii]
            ti = tau[ii - k - 2]
            ci = col[ii - k - 2]
            for jj in range(k + 2, n):
                arow[jj] += ti * col[jj - k - 2] - ci * tau[jj - k - 2]
    return pf


def pfaffian(A: Sequence[Sequence], ctx: Optional[PrecisionContext] = None,
             validate: bool = True) -> mpmath.mpc:
    """Pfaffian of an even-dimensional antisymmetric matrix.

    Accepts real or complex entries (python, mpmath or gmpy2 scalars).
    validate checks antisymmetry and the zero diagonal before eliminating.
    """
    c = ctx if ctx is not None else PrecisionContext()
    n = len(A)
    if n % 2 != 0:
        raise ValueError(f"dimension must be even, got {n}")
    if any(len(row) != n for row in A):
        raise ValueError("matrix is not square")
    with context(c.bits):
        M = _to_internal(A, c.bits)
        if validate:
            _check_antisymmetric(M, c.bits)
        return mpc_to_mpc(_pfaffian_ltl(M))


def pfaffian_laplace(A: Sequence[Sequence], ctx: Optional[PrecisionContext] = None) -> mpmath.mpc:
    """Pfaffian by Laplace expansion along the first row.  Exponential cost;
    guarded to dimension <= 12.  Exists as an oracle for the elimination."""
    c = ctx if ctx is not None else PrecisionContext()
    n = len(A)
    if n % 2 != 0:
        raise ValueError(f"dimension must be even, got {n}")
    if n > 12:
        raise ValueError(f"Laplace expansion limited to dimension 12, got {n}")
    with context(c.bits):
        M = _to_internal(A, c.bits)

        def rec(idx: tuple) -> mpc:
            m = len(idx)
            if m == 0:
                return mpc(1)
            i0 = idx[0]
            acc = mpc(0)
            sign = 1
            for pos in range(1, m):
                j = idx[pos]
                rest = idx[1:pos] + idx[pos + 1:]
                acc += sign * M[i0][j] * rec(rest)
                sign = -sign
            return acc

        return mpc_to_mpc(rec(tuple(range(n))))


def determinant(A: Sequence[Sequence], ctx: Optional[PrecisionContext] = None) -> mpmath.mpc:
    """Determinant via complex LU with partial pivoting.  Independent of the
    Pfaffian elimination; used to confirm Pf(A)^2 = det(A)."""
    c = ctx if ctx is not None else PrecisionContext()
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("matrix is not square")
    with context(c.bits):
        M = _to_internal(A, c.bits)
        det = mpc(1)
        for k in range(n):
            piv_row = max(range(k, n), key=lambda i: gmpy2.norm(M[i][k]))
            if piv_row != k:
                M[k], M[piv_row] = M[piv_row], M[k]
                det = -det
            piv = M[k][k]
            if piv == 0:
                return mpmath.mpc(0)
            det *= piv
            for i in range(k + 1, n):
                f = M[i][k] / piv
                if f == 0:
                    continue
                Mi, Mk = M[i], M[k]
                for j in range(k + 1, n):
                    Mi[j] -= f * Mk[j]
        return mpc_to_mpc(det)


def border_with_vector(H: Sequence[Sequence], nu: Sequence) -> list:
    """Extend an n x n antisymmetric matrix by one row/column: new last
    column nu, last row -nu, corner zero.  Entries are passed through as
    given; callers keep everything in one scalar family."""
    n = len(H)
    if any(len(row) != n for row in H):
        raise ValueError("matrix is not square")
    if len(nu) != n:
        raise ValueError(f"border length {len(nu)} does not match matrix size {n}")
    out = [list(row) + [nu[i]] for i, row in enumerate(H)]
    out.append([-v for v in nu] + [0])
    return out
