"""Exact Gaussian elimination over F_p on int64 numpy arrays.

The elimination kernels are compiled with numba; everything else is plain
numpy. Pivoting takes the first remaining row with a nonzero entry.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _inverse(a, p):
    e = p - 2
    out = 1
    a = a % p
    while e:
        if e & 1:
            out = out * a % p
        a = a * a % p
        e >>= 1
    return out


@njit(cache=True)
def _forward(A, p):
    """In-place row echelon form with unit pivots; returns pivot columns."""
    rows, cols = A.shape
    piv = np.empty(min(rows, cols), dtype=np.int64)
    invp = 1.0 / p
    r = 0
    for c in range(cols):
        if r == rows:
            break
        k = -1
        for i in range(r, rows):
            if A[i, c] != 0:
                k = i
                break
        if k < 0:
            continue
        if k != r:
            for j in range(c, cols):
                tmp = A[r, j]
                A[r, j] = A[k, j]
                A[k, j] = tmp
        inv = _inverse(A[r, c], p)
        for j in range(c, cols):
            A[r, j] = A[r, j] * inv % p
        for i in range(r + 1, rows):
            f = A[i, c]
            if f != 0:
                g = p - f
                for j in range(c, cols):
                    x = A[i, j] + g * A[r, j]
                    y = x - p * np.int64(x * invp)
                    if y >= p:
                        y -= p
                    elif y < 0:
                        y += p
                    A[i, j] = y
        piv[r] = c
        r += 1
    return piv[:r]


@njit(cache=True)
def _reduce_up(A, piv, p):
    """Clear entries above each pivot of an echelon matrix, in place."""
    cols = A.shape[1]
    invp = 1.0 / p
    for k in range(piv.shape[0] - 1, -1, -1):
        c = piv[k]
        for i in range(k):
            f = A[i, c]
            if f != 0:
                g = p - f
                for j in range(c, cols):
                    x = A[i, j] + g * A[k, j]
                    y = x - p * np.int64(x * invp)
                    if y >= p:
                        y -= p
                    elif y < 0:
                        y += p
                    A[i, j] = y


@njit(cache=True)
def _back_solve(A, piv, x, p):
    """Fill pivot entries of x so the echelon rows of A are satisfied.

    x holds the chosen free-variable values on entry (pivot entries ignored)
    and, if A is augmented, x[-1] = -1 selects the right-hand side.
    """
    n = x.shape[0]
    for k in range(piv.shape[0] - 1, -1, -1):
        c = piv[k]
        acc = 0
        for j in range(c + 1, n):
            acc = (acc + A[k, j] * x[j]) % p
        x[c] = (p - acc) % p
    return x


def _as_matrix(M, p: int) -> np.ndarray:
    A = np.array(M, dtype=np.int64)
    if A.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return A % p


def echelon(M, p: int) -> tuple[np.ndarray, list[int]]:
    A = _as_matrix(M, p)
    if A.size == 0:
        return A, []
    piv = _forward(A, p)
    return A, [int(c) for c in piv]


def rref(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of M over F_p and its pivot columns."""
    A = _as_matrix(M, p)
    if A.size == 0:
        return A, []
    piv = _forward(A, p)
    _reduce_up(A, piv, p)
    return A, [int(c) for c in piv]


def rank(M, p: int) -> int:
    return len(echelon(M, p)[1])


def _null_from_echelon(A: np.ndarray, piv: list[int], n: int, p: int, limit: int | None = None) -> np.ndarray:
    pivset = set(piv)
    free = [c for c in range(n) if c not in pivset]
    if limit is not None:
        free = free[:limit]
    out = np.zeros((len(free), n), dtype=np.int64)
    pv = np.array(piv, dtype=np.int64)
    for k, f in enumerate(free):
        x = np.zeros(n, dtype=np.int64)
        x[f] = 1
        out[k] = _back_solve(A[:, :n], pv, x, p) if piv else x
    return out


def nullspace(M, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis of {x : Mx = 0}, one row per free column in increasing order.

    Each basis vector has a 1 in its own free column and 0 in the others,
    which is exactly the basis read off the reduced row echelon form.
    """
    A = np.asarray(M, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] == 0:
        n = ncols if ncols is not None else (A.shape[1] if A.ndim == 2 else 0)
        return np.eye(n, dtype=np.int64)
    E, piv = echelon(A, p)
    return _null_from_echelon(E, piv, A.shape[1], p)


def first_null_vector(M, p: int) -> np.ndarray | None:
    """Nullspace vector with its first free column 1 and all other free columns 0."""
    A = np.asarray(M, dtype=np.int64)
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=np.int64)[0] if A.shape[1] else None
    E, piv = echelon(A, p)
    basis = _null_from_echelon(E, piv, A.shape[1], p, limit=1)
    return basis[0] if basis.shape[0] else None


def solve(M, b, p: int) -> tuple[np.ndarray, np.ndarray] | None:
    """Particular solution (free variables 0) and nullspace basis of Mx = b.

    Returns None when the system is inconsistent.
    """
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.zeros(n, dtype=np.int64), np.eye(n, dtype=np.int64)
    aug = np.hstack([M, np.asarray(b, dtype=np.int64).reshape(-1, 1)])
    E, piv = echelon(aug, p)
    if piv and piv[-1] == n:
        return None
    x = np.zeros(n + 1, dtype=np.int64)
    x[n] = p - 1
    if piv:
        _back_solve(E, np.array(piv, dtype=np.int64), x, p)
    return x[:n], _null_from_echelon(E, piv, n, p)
