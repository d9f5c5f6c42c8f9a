"""Exact dense linear algebra over a prime field F_p.

Matrices are numpy int64 arrays with entries in [0, p). The elimination
kernels come from the compiled extension when it is importable, otherwise
from the pure-Python fallback. Set MVSS_PURE_PYTHON=1 to force the fallback.
"""
import os

import numpy as np

from . import _fallback

if os.environ.get("MVSS_PURE_PYTHON", "") not in ("", "0"):
    _backend = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _backend
        BACKEND = "cython"
    except ImportError:  # extension not built
        _backend = _fallback
        BACKEND = "python"


def use_backend(name):
    """Switch kernels at runtime ('cython' or 'python'). Returns the previous name."""
    global _backend, BACKEND
    prev = BACKEND
    if name == "python":
        _backend, BACKEND = _fallback, "python"
    elif name == "cython":
        from . import _kernels
        _backend, BACKEND = _kernels, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev


def is_prime(p):
    if not isinstance(p, (int, np.integer)) or p < 2:
        return False
    p = int(p)
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    i = 3
    while i * i <= p:
        if p % i == 0:
            return False
        i += 2
    return True


def as_mod(A, p):
    """Copy ``A`` into a C-contiguous int64 array reduced mod p."""
    return np.ascontiguousarray(np.mod(np.asarray(A, dtype=np.int64), p))


def zeros(m, n):
    return np.zeros((m, n), dtype=np.int64)


def matmul(A, B, p):
    if A.shape[1] == 0 or A.shape[0] == 0 or B.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if A.shape[1] * (p - 1) ** 2 < 2 ** 52:
        # exact in double precision, and BLAS is much faster than integer matmul
        C = np.asarray(A, dtype=np.float64) @ np.asarray(B, dtype=np.float64)
        return np.mod(C.astype(np.int64), p)
    # integer path in chunks small enough not to overflow int64
    step = max(1, (2 ** 62) // max((p - 1) ** 2, 1))
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for k in range(0, A.shape[1], step):
        out = (out + (A[:, k:k + step] % p) @ (B[k:k + step] % p)) % p
    return out


def rref(A, p):
    """Return (R, pivots) with R the reduced row echelon form of A."""
    R = as_mod(A, p)
    if R.size == 0:
        return R, []
    piv = _backend.rref_inplace(R, p)
    return R, list(piv)


def rank(A, p):
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def nullspace(A, p):
    """Basis of {x : A x = 0} as the columns of an (n x k) matrix."""
    A = np.asarray(A)
    n = A.shape[1]
    if A.shape[0] == 0 or A.size == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = rref(A, p)
    free = [j for j in range(n) if j not in set(piv)]
    N = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        N[f, k] = 1
        for i, pc in enumerate(piv):
            N[pc, k] = (-R[i, f]) % p
    return N


def pivot_columns(A, p):
    """Indices of a maximal set of independent columns, greedy left to right."""
    A = np.asarray(A)
    if A.size == 0:
        return []
    return rref(A, p)[1]


def colspace(A, p):
    """A column basis of span(A) chosen among the columns of A."""
    A = np.asarray(A, dtype=np.int64)
    return A[:, pivot_columns(A, p)]


def solve(A, B, p):
    """Solve A X = B. Returns X or None when some column is inconsistent."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    m, n = A.shape
    k = B.shape[1]
    if k == 0:
        X = np.zeros((n, 0), dtype=np.int64)
        return X[:, 0] if vec else X
    if m == 0:
        X = np.zeros((n, k), dtype=np.int64)
        return X[:, 0] if vec else X
    R, piv = rref(np.hstack([A, B]), p)
    if any(c >= n for c in piv):
        return None
    X = np.zeros((n, k), dtype=np.int64)
    for i, c in enumerate(piv):
        X[c] = R[i, n:]
    return X[:, 0] if vec else X


def in_span(A, v, p):
    return solve(A, v, p) is not None


def inverse(A, p):
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    X = solve(A, np.eye(n, dtype=np.int64), p)
    if X is None or rank(A, p) < n:
        raise ValueError("matrix is singular")
    return X


def reduce_columns(D, p):
    """Persistence column reduction. Returns (reduced matrix, lows)."""
    R = as_mod(D, p)
    if R.shape[1] == 0:
        return R, np.zeros(0, dtype=np.int64)
    if R.shape[0] == 0:
        return R, np.full(R.shape[1], -1, dtype=np.int64)
    lows = _backend.reduce_columns_inplace(R, p)
    return R, np.asarray(lows, dtype=np.int64)


def quotient_basis(sub, ambient, p):
    """Pick columns of ``ambient`` completing a basis of span(sub) to span(sub + ambient).

    Returns the chosen columns as a matrix.
    """
    sub = np.asarray(sub, dtype=np.int64)
    ambient = np.asarray(ambient, dtype=np.int64)
    if ambient.shape[1] == 0:
        return ambient
    sub = colspace(sub, p) if sub.shape[1] else sub
    piv = pivot_columns(np.hstack([sub, ambient]), p)
    s = sub.shape[1]
    return ambient[:, [c - s for c in piv if c >= s]]
