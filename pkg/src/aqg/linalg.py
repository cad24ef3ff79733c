"""Exact Gaussian elimination over Q / Q(i) plus a thin numeric eigen layer.

Matrices are plain lists of rows.  Entries may be Fractions, GaussRationals
or (for the numeric helpers) anything ``complex()`` accepts.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .scalars import conj

Matrix = List[list]


class InconsistentSystem(ValueError):
    pass


def _copy(rows: Sequence[Sequence]) -> Matrix:
    return [list(r) for r in rows]


def row_reduce(rows: Sequence[Sequence], ncols: Optional[int] = None):
    """Reduced row echelon form. Returns ``(rref, pivot_columns)``."""
    m = _copy(rows)
    if not m:
        return m, []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(row_reduce(rows)[1])


def solve(a: Sequence[Sequence], b: Sequence) -> list:
    """Exact solution of ``a x = b``; the free variables are set to zero.

    Raises :class:`InconsistentSystem` when no solution exists.
    """
    n = len(a[0]) if a else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, pivots = row_reduce(aug, ncols=n)
    for row in red[len(pivots):]:
        if row[n] != 0:
            raise InconsistentSystem("linear system has no solution")
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = red[i][n]
    return x


def solve_many(a: Sequence[Sequence], rhs_columns: Sequence[Sequence]) -> List[list]:
    """Solve ``a x_k = b_k`` for several right-hand sides at once."""
    n = len(a[0])
    k = len(rhs_columns)
    aug = [list(row) + [col[i] for col in rhs_columns] for i, row in enumerate(a)]
    red, pivots = row_reduce(aug, ncols=n)
    for row in red[len(pivots):]:
        if any(v != 0 for v in row[n:]):
            raise InconsistentSystem("linear system has no solution")
    out = []
    for j in range(k):
        x = [Fraction(0)] * n
        for i, c in enumerate(pivots):
            x[c] = red[i][n + j]
        out.append(x)
    return out


def nullspace(a: Sequence[Sequence], ncols: int) -> List[list]:
    """Basis of ``{x : a x = 0}``; each vector has a 1 at its free column."""
    if not a:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, pivots = row_reduce(a, ncols=ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -red[i][f]
        basis.append(v)
    return basis


def inverse(a: Sequence[Sequence]) -> Matrix:
    n = len(a)
    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    cols = solve_many(a, [[eye[i][j] for i in range(n)] for j in range(n)])
    if rank(a) != n:
        raise InconsistentSystem("matrix is singular")
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def exact_psd(h: Sequence[Sequence]):
    """Classify an exact Hermitian matrix.

    Returns ``(positive_semidefinite, positive_definite)`` from a symmetric
    elimination; no floating point is involved.
    """
    m = _copy(h)
    n = len(m)
    definite = True
    for k in range(n):
        d = m[k][k]
        d = d.re if hasattr(d, "re") and not isinstance(d, complex) else d
        if d < 0:
            return False, False
        if d == 0:
            definite = False
            if any(m[k][j] != 0 for j in range(k, n)):
                return False, False
            continue
        for i in range(k + 1, n):
            if m[i][k] != 0:
                f = m[i][k] / m[k][k]
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return True, definite


def to_array(rows: Sequence[Sequence]) -> np.ndarray:
    return np.array([[complex(x) for x in r] for r in rows], dtype=complex)


def min_eigenvalue(h: Sequence[Sequence]) -> float:
    arr = to_array(h)
    arr = (arr + arr.conj().T) / 2
    return float(np.linalg.eigvalsh(arr)[0])


def hermitian_eig(arr: np.ndarray):
    """Eigen-decomposition of a Hermitian matrix, ascending eigenvalues."""
    arr = (arr + arr.conj().T) / 2
    return np.linalg.eigh(arr)


def conj_transpose(rows: Sequence[Sequence]) -> Matrix:
    return [[conj(rows[j][i]) for j in range(len(rows))] for i in range(len(rows[0]))]
