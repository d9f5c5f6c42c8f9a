"""Pure-Python versions of the elimination kernels in ``_kernels.pyx``."""
import numpy as np


def rref_inplace(M, p):
    m, n = M.shape
    r = 0
    pivots = []
    for c in range(n):
        if r >= m:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
        inv = pow(int(M[r, c]), -1, p)
        if inv != 1:
            M[r, c:] = (M[r, c:] * inv) % p
        col = M[:, c].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            M[rows, c:] = (M[rows, c:] + np.outer(p - col[rows], M[r, c:])) % p
        pivots.append(c)
        r += 1
    return pivots


def _low(col):
    nz = np.nonzero(col)[0]
    return int(nz[-1]) if nz.size else -1


def reduce_columns_inplace(M, p):
    m, n = M.shape
    lows = np.full(n, -1, dtype=np.int64)
    owner = {}
    for j in range(n):
        low = _low(M[:, j])
        while low >= 0 and low in owner:
            k = owner[low]
            f = (-int(M[low, j]) * pow(int(M[low, k]), -1, p)) % p
            M[:, j] = (M[:, j] + f * M[:, k]) % p
            low = _low(M[:, j])
        if low >= 0:
            owner[low] = j
            lows[j] = low
    return lows
