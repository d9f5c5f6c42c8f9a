"""Independent reference computations used by the tests.

Nothing here imports mvss.linalg or the page engine: ranks and kernels are
plain-Python Gaussian elimination on lists, page dimensions come straight
from the filtered boundary of a realization, barcodes from rank functions by
inclusion-exclusion, and bottleneck distances by exhaustive matching.
"""
import math
from itertools import combinations, permutations

INF = float("inf")


# linear algebra over F_p on lists of rows
def _rows(M):
    return [[int(x) for x in row] for row in M]


def echelon(M, p):
    """Row echelon form of a list-of-rows matrix; returns (rows, pivot columns)."""
    A = [[x % p for x in row] for row in _rows(M)]
    if not A:
        return [], []
    ncol = len(A[0])
    piv = []
    r = 0
    for c in range(ncol):
        k = next((i for i in range(r, len(A)) if A[i][c]), None)
        if k is None:
            continue
        A[r], A[k] = A[k], A[r]
        inv = pow(A[r][c], p - 2, p)
        A[r] = [(x * inv) % p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[r])]
        piv.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], piv


def rank(M, p):
    M = _rows(M)
    if not M or not M[0]:
        return 0
    return len(echelon(M, p)[1])


def kernel(M, p, ncols=None):
    """Basis of the null space of M (list of rows) as a list of column vectors."""
    M = _rows(M)
    n = ncols if ncols is not None else (len(M[0]) if M else 0)
    if not M:
        return [[int(i == j) for i in range(n)] for j in range(n)]
    R, piv = echelon(M, p)
    free = [c for c in range(n) if c not in piv]
    out = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = (-R[i][f]) % p
        out.append(v)
    return out


def span_dim(vectors, p):
    if not vectors:
        return 0
    return rank(vectors, p)


def transpose(M):
    return [list(r) for r in zip(*M)] if M else []


# chain data of a filtered complex at a grid index
def boundary_at(K, t, k, members=None):
    """(rows, cols, matrix) of the boundary from k-cells to (k-1)-cells alive at t."""
    def alive(c):
        return c.birth <= t and (members is None or c.id in members)
    cols = [c.id for c in K.cells if c.dim == k and alive(c)]
    rows = [c.id for c in K.cells if c.dim == k - 1 and alive(c)]
    pos = {r: i for i, r in enumerate(rows)}
    M = [[0] * len(cols) for _ in rows]
    for j, c in enumerate(cols):
        for f, v in K.cells[c].boundary:
            if f in pos:
                M[pos[f]][j] = v % K.field
    return rows, cols, M


def betti(K, k, t, members=None):
    p = K.field
    _, cols, Dk = boundary_at(K, t, k, members)
    _, _, Dk1 = boundary_at(K, t, k + 1, members)
    rk = rank(Dk, p) if cols and k > 0 else 0
    rk1 = rank(Dk1, p) if Dk1 and Dk1[0] else 0
    return len(cols) - rk - rk1


def _embed(vecs, ids, allids):
    pos = {c: i for i, c in enumerate(ids)}
    return [[v[pos[c]] if c in pos else 0 for c in allids] for v in vecs]


def rank_function(K, k, members=None):
    """rk[s][t] = rank of H_k(K_s) -> H_k(K_t), from dim(Z_s + B_t) - dim B_t."""
    p = K.field
    T = len(K.grid)
    allk = [c.id for c in K.cells if c.dim == k and (members is None or c.id in members)]
    Z, B = [], []
    for t in range(T):
        rows, cols, Dk = boundary_at(K, t, k, members)
        z = kernel(Dk, p, len(cols)) if k > 0 else [[int(i == j) for i in range(len(cols))] for j in range(len(cols))]
        Z.append(_embed(z, cols, allk))
        r1, c1, D1 = boundary_at(K, t, k + 1, members)
        b = [[D1[i][j] for i in range(len(r1))] for j in range(len(c1))]
        B.append(_embed(b, r1, allk))
    rk = [[0] * T for _ in range(T)]
    for s in range(T):
        for t in range(s, T):
            rk[s][t] = span_dim(Z[s] + B[t], p) - span_dim(B[t], p)
    return rk


def barcode_from_ranks(rk, grid):
    """Multiset of bars [g_s, g_{t+1}) by inclusion-exclusion (death at the last index = inf)."""
    T = len(grid)

    def r(s, t):
        if s < 0 or t >= T or s > t:
            return 0
        return rk[s][t]
    bars = []
    for s in range(T):
        for t in range(s, T):
            m = r(s, t) - r(s - 1, t) - r(s, t + 1) + r(s - 1, t + 1)
            death = INF if t == T - 1 else grid[t + 1]
            bars += [(grid[s], death)] * m
    return sorted(bars)


def barcode(K, k, members=None):
    return barcode_from_ranks(rank_function(K, k, members), list(K.grid))


# spectral sequence pages straight from a filtered chain complex
def page_dims(cells, filt, field, r, n):
    """dim E^r_{p, n-p} for every p from first principles.

    ``cells``: list of (degree, boundary dict {index: coeff}) for a chain
    complex at one grid index; ``filt``: filtration level per cell. Uses
    E^r_p = Z^r_p / (Z^{r-1}_{p-1} + D Z^{r-1}_{p+r-1}) with
    Z^r_p = {x in F_p : Dx in F_{p-r}}.
    """
    p_ = field
    N = len(cells)

    def D_col(j):
        v = [0] * N
        for i, c in cells[j][1].items():
            v[i] = c % p_
        return v

    def Z(r, p, deg):
        cols = [j for j in range(N) if cells[j][0] == deg and filt[j] <= p]
        rows = [i for i in range(N) if cells[i][0] == deg - 1 and filt[i] > p - r]
        if not cols:
            return []
        if not rows:
            base = [[int(i == j) for i in range(N)] for j in cols]
            return base
        M = [[D_col(j)[i] for j in cols] for i in rows]
        ker = kernel(M, p_, len(cols))
        out = []
        for v in ker:
            w = [0] * N
            for a, j in enumerate(cols):
                w[j] = v[a]
            out.append(w)
        return out

    def D(v):
        out = [0] * N
        for j, x in enumerate(v):
            if x:
                for i, c in cells[j][1].items():
                    out[i] = (out[i] + x * c) % p_
        return out

    P = max(filt) if filt else 0
    dims = {}
    for p in range(0, P + 1):
        num = Z(r, p, n)
        den = Z(r - 1, p - 1, n) + [D(v) for v in Z(r - 1, p + r - 1, n + 1)]
        dims[p] = span_dim(num + den, p_) - span_dim(den, p_)
    return dims


def realization_pages(B, t, r, n):
    """page_dims for the blowup complex B at grid index t, filtered by nerve degree."""
    K = B.complex
    alive = [c for c in K.cells if c.birth <= t]
    pos = {c.id: i for i, c in enumerate(alive)}
    cells = [(c.dim, {pos[f]: v for f, v in c.boundary}) for c in alive]
    filt = [len(B.sigma_of[c.id]) - 1 for c in alive]
    return page_dims(cells, filt, K.field, r, n)


# bottleneck by exhaustive matching
def bottleneck(A, B):
    A, B = list(A), list(B)
    n = len(A) + len(B)
    if n == 0:
        return 0.0

    def cost(a, b):
        if a is None and b is None:
            return 0.0
        if a is None:
            return _half(b)
        if b is None:
            return _half(a)
        if (a[1] == INF) != (b[1] == INF):
            return INF
        d = abs(a[0] - b[0])
        if a[1] != INF:
            d = max(d, abs(a[1] - b[1]))
        return d
    left = A + [None] * len(B)
    right = B + [None] * len(A)
    best = INF
    for perm in permutations(range(n)):
        c = max(cost(left[i], right[perm[i]]) for i in range(n))
        best = min(best, c)
    return best


def _half(bar):
    return INF if bar[1] == INF else (bar[1] - bar[0]) / 2


def hausdorff(X, Y):
    def d(a, b):
        return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))
    X, Y = [list(map(float, x)) for x in X], [list(map(float, y)) for y in Y]
    return max(max(min(d(x, y) for y in Y) for x in X), max(min(d(x, y) for x in X) for y in Y))


def all_subsets(seq, lo=1):
    for r in range(lo, len(seq) + 1):
        yield from combinations(seq, r)
