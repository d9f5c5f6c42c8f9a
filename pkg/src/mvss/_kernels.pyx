# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled F_p elimination kernels.

Both routines work in place on C-contiguous int64 matrices whose entries
are already reduced to [0, p).
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline long long _inv(long long a, long long p) nogil:
    # extended Euclid, a in [1, p)
    cdef long long t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


def rref_inplace(long long[:, ::1] M, long long p):
    """Reduced row echelon form mod p. Returns the pivot column indices."""
    cdef Py_ssize_t m = M.shape[0], n = M.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef long long inv, f, tmp
    pivots = []
    for c in range(n):
        if r >= m:
            break
        piv = -1
        for i in range(r, m):
            if M[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, n):
                tmp = M[r, j]
                M[r, j] = M[piv, j]
                M[piv, j] = tmp
        inv = _inv(M[r, c], p)
        if inv != 1:
            for j in range(c, n):
                M[r, j] = (M[r, j] * inv) % p
        for i in range(m):
            if i == r:
                continue
            f = M[i, c]
            if f == 0:
                continue
            f = p - f
            for j in range(c, n):
                if M[r, j] != 0:
                    M[i, j] = (M[i, j] + f * M[r, j]) % p
        pivots.append(c)
        r += 1
    return pivots


def reduce_columns_inplace(long long[:, ::1] M, long long p):
    """Left-to-right column reduction mod p (persistence algorithm).

    Returns the array of lowest nonzero row per column, -1 for zero columns.
    """
    cdef Py_ssize_t m = M.shape[0], n = M.shape[1]
    cdef Py_ssize_t j, k, i, low
    cdef long long f, inv
    low_arr = np.full(n, -1, dtype=np.int64)
    owner_arr = np.full(max(m, 1), -1, dtype=np.int64)
    cdef long long[::1] lows = low_arr
    cdef long long[::1] owner = owner_arr
    for j in range(n):
        while True:
            low = -1
            for i in range(m - 1, -1, -1):
                if M[i, j] != 0:
                    low = i
                    break
            if low < 0:
                break
            k = owner[low]
            if k < 0:
                owner[low] = j
                lows[j] = low
                break
            inv = _inv(M[low, k], p)
            f = (p - (M[low, j] * inv) % p) % p
            for i in range(low + 1):
                if M[i, k] != 0:
                    M[i, j] = (M[i, j] + f * M[i, k]) % p
    return low_arr
