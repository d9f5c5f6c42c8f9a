"""Barcodes, persistence modules, rank functions and interleaving checks."""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import linalg
from .complex import FiltrationGrid, TOL

INF = math.inf


class PersistenceError(ValueError):
    pass


@dataclass
class Barcode:
    dim: int
    bars: list = field(default_factory=list)

    def __post_init__(self):
        clean = []
        for b, d in self.bars:
            d = INF if d is None else float(d)
            b = float(b)
            if not d > b:
                raise PersistenceError(f"bar [{b}, {d}) is empty")
            clean.append((b, d))
        clean.sort()
        self.bars = clean

    def __len__(self):
        return len(self.bars)

    def __eq__(self, other):
        if not isinstance(other, Barcode):
            return NotImplemented
        if len(self.bars) != len(other.bars):
            return False
        return all(abs(a - c) <= TOL and (b == d or abs(b - d) <= TOL)
                   for (a, b), (c, d) in zip(self.bars, other.bars))

    def same_bars(self, other):
        return Barcode(0, self.bars) == Barcode(0, other.bars)

    def dim_at(self, value):
        return sum(1 for b, d in self.bars if b <= value + TOL and d > value + TOL)

    def finite(self):
        return [(b, d) for b, d in self.bars if d < INF]

    def max_length(self):
        return max((d - b for b, d in self.bars), default=0.0)

    def to_json(self):
        return {"dim": self.dim,
                "bars": [[_num(b), None if d == INF else _num(d)] for b, d in self.bars]}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["dim"]), [(b, INF if d is None else d) for b, d in obj["bars"]])

    def __repr__(self):
        inner = ", ".join(f"[{_num(b)},{'inf' if d == INF else _num(d)})" for b, d in self.bars)
        return f"Barcode(dim={self.dim}, {{{inner}}})"


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else x


# ---------------------------------------------------------------- reduction

def compute_ph(complex_, max_dim=None):
    """Barcodes of a filtered complex in degrees 0..max_dim by column reduction."""
    K = complex_
    if max_dim is None:
        max_dim = max(K.max_dim, 0)
    p = K.field
    order = sorted(range(len(K.cells)), key=lambda i: (K.cells[i].birth, K.cells[i].dim, i))
    by_dim = {}
    for i in order:
        by_dim.setdefault(K.cells[i].dim, []).append(i)
    g = K.grid
    positive = {0: list(by_dim.get(0, []))}
    killed = {}
    bars = {k: [] for k in range(max_dim + 1)}
    for k in range(1, max_dim + 2):
        cols = by_dim.get(k, [])
        rows = by_dim.get(k - 1, [])
        rpos = {r: i for i, r in enumerate(rows)}
        D = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for j, c in enumerate(cols):
            for f, coeff in K.cells[c].boundary:
                D[rpos[f], j] = coeff % p
        _, lows = linalg.reduce_columns(D, p)
        dead = set()
        pos_k = []
        for j, c in enumerate(cols):
            lo = int(lows[j]) if len(lows) else -1
            if lo < 0:
                pos_k.append(c)
                continue
            r = rows[lo]
            dead.add(r)
            if k - 1 <= max_dim:
                b, d = K.cells[r].birth, K.cells[c].birth
                if b < d:
                    bars[k - 1].append((g[b], g[d]))
        killed[k - 1] = dead
        positive[k] = pos_k
    for k in range(max_dim + 1):
        for c in positive.get(k, []):
            if c not in killed.get(k, set()):
                bars[k].append((g[K.cells[c].birth], INF))
    return [Barcode(k, bars[k]) for k in range(max_dim + 1)]


# ---------------------------------------------------------------- homology bases

class HomologyBasis:
    """Homology in degree k of a (sub)complex at grid index t.

    Chains are vectors over all k-cells of the parent complex, in the order of
    ``K.by_dim(k)``; cells outside the subcomplex or unborn at t are zero.
    """

    def __init__(self, K, k, t, members=None):
        self.K, self.k, self.t = K, k, t
        p = self.p = K.field
        allk = K.by_dim(k)
        self.n = len(allk)
        pos = {c: i for i, c in enumerate(allk)}
        self.pos = pos

        def alive(c):
            return K.cells[c].birth <= t and (members is None or c in members)

        live_k = [c for c in allk if alive(c)]
        live_km1 = [c for c in K.by_dim(k - 1) if alive(c)] if k > 0 else []
        live_kp1 = [c for c in K.by_dim(k + 1) if alive(c)]
        # cycles
        rpos = {c: i for i, c in enumerate(live_km1)}
        Dk = np.zeros((len(live_km1), len(live_k)), dtype=np.int64)
        for j, c in enumerate(live_k):
            for f, co in K.cells[c].boundary:
                Dk[rpos[f], j] = co % p
        N = linalg.nullspace(Dk, p) if live_k else np.zeros((0, 0), dtype=np.int64)
        Z = np.zeros((self.n, N.shape[1]), dtype=np.int64)
        for i, c in enumerate(live_k):
            Z[pos[c]] = N[i]
        # boundaries
        Bm = np.zeros((self.n, len(live_kp1)), dtype=np.int64)
        for j, c in enumerate(live_kp1):
            for f, co in K.cells[c].boundary:
                Bm[pos[f], j] = co % p
        self.B = linalg.colspace(Bm, p) if Bm.shape[1] else Bm
        self.reps = linalg.quotient_basis(self.B, Z, p)
        self.dim = self.reps.shape[1]
        self._M = np.hstack([self.B, self.reps])

    def coords(self, V):
        """Coordinates in the homology basis of cycles given as columns of V."""
        V = np.asarray(V, dtype=np.int64)
        if V.ndim == 1:
            V = V[:, None]
        if V.shape[1] == 0:
            return np.zeros((self.dim, 0), dtype=np.int64)
        X = linalg.solve(self._M, V % self.p, self.p)
        if X is None:
            raise PersistenceError("vector is not a cycle of this subcomplex")
        return X[self.B.shape[1]:]

    def is_boundary(self, v):
        if self.B.shape[1] == 0:
            return not np.any(np.asarray(v) % self.p)
        return linalg.in_span(self.B, np.asarray(v) % self.p, self.p)


def homology_module(K, k, members=None):
    """PH_k of a complex (or of a subcomplex ``members``) as a PersistenceModule."""
    bases = [HomologyBasis(K, k, t, members) for t in range(len(K.grid))]
    maps = [bases[t + 1].coords(bases[t].reps) for t in range(len(bases) - 1)]
    mod = PersistenceModule(K.grid, [b.dim for b in bases], maps, K.field)
    mod.bases = bases
    return mod


def homology_dims(K, k, t):
    """Pointwise Betti number via ranks of boundary matrices."""
    p = K.field
    nk = len(K.cells_at(k, t))
    r_k = linalg.rank(K.boundary_matrix(k, t), p) if k > 0 else 0
    r_k1 = linalg.rank(K.boundary_matrix(k + 1, t), p)
    return nk - r_k - r_k1


# ---------------------------------------------------------------- modules

class PersistenceModule:
    """Pointwise finite-dimensional module on a grid: dims plus consecutive maps."""

    def __init__(self, grid, dims, maps, field=2):
        self.grid = grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)
        self.dims = [int(d) for d in dims]
        self.field = field
        if len(self.dims) != len(self.grid):
            raise PersistenceError("one space per grid value is required")
        if len(maps) != len(self.dims) - 1:
            raise PersistenceError("one map per consecutive grid pair is required")
        self.maps = []
        for i, M in enumerate(maps):
            M = np.asarray(M, dtype=np.int64).reshape(self.dims[i + 1], self.dims[i]) \
                if np.asarray(M).size == 0 else linalg.as_mod(M, field)
            if M.shape != (self.dims[i + 1], self.dims[i]):
                raise PersistenceError(
                    f"map {i} has shape {M.shape}, expected {(self.dims[i + 1], self.dims[i])}")
            self.maps.append(M)
        self._cache = {}

    def __len__(self):
        return len(self.dims)

    def map(self, s, t):
        """Structure map from index s to index t >= s."""
        if t < s:
            raise PersistenceError("structure maps only go forward")
        key = (s, t)
        if key not in self._cache:
            if s == t:
                M = np.eye(self.dims[s], dtype=np.int64)
            else:
                M = linalg.matmul(self.maps[t - 1], self.map(s, t - 1), self.field)
            self._cache[key] = M
        return self._cache[key]

    def shift_map(self, t, eps):
        return self.map(t, self.grid.shift(t, eps))

    def rank_function(self):
        n = len(self.dims)
        rk = np.zeros((n, n), dtype=np.int64)
        for s in range(n):
            for t in range(s, n):
                rk[s, t] = linalg.rank(self.map(s, t), self.field) if self.dims[s] and self.dims[t] else 0
        return RankFunction(self.grid, rk)

    def barcode(self, dim=0):
        return self.rank_function().barcode(dim)

    def restrict_to_grid(self, grid):
        """View the module on a finer grid (values between old grid points repeat)."""
        grid = grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)
        src = [self.grid.floor_index(v) for v in grid]
        if src[0] < 0:
            raise PersistenceError("new grid starts before the module")
        dims = [self.dims[i] for i in src]
        maps = [self.map(src[i], src[i + 1]) for i in range(len(src) - 1)]
        return PersistenceModule(grid, dims, maps, self.field)

    @classmethod
    def zero(cls, grid, field=2):
        n = len(grid)
        return cls(grid, [0] * n, [np.zeros((0, 0), dtype=np.int64)] * (n - 1), field)


def module_from_pointwise(grid, dims, maps, field=2):
    return PersistenceModule(grid, dims, maps, field)


def barcode(module, dim=0):
    return module.barcode(dim)


class RankFunction:
    def __init__(self, grid, ranks):
        self.grid = grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)
        self.ranks = np.asarray(ranks, dtype=np.int64)

    def __eq__(self, other):
        return isinstance(other, RankFunction) and np.array_equal(self.ranks, other.ranks)

    def is_monotone(self):
        r, n = self.ranks, len(self.grid)
        for s in range(n):
            for t in range(s, n):
                if t + 1 < n and r[s, t] < r[s, t + 1]:
                    return False
                if s > 0 and r[s - 1, t] > r[s, t]:
                    return False
        return True

    def barcode(self, dim=0):
        return barcode_from_rank(self, dim)


def barcode_from_rank(rf, dim=0):
    """Bars from a rank function by inclusion-exclusion on grid indices."""
    r = rf.ranks
    g = rf.grid
    n = len(g)

    def rk(s, t):
        return int(r[s, t]) if s >= 0 else 0

    bars = []
    for b in range(n):
        for d in range(b + 1, n):
            mu = rk(b, d - 1) - rk(b - 1, d - 1) - rk(b, d) + rk(b - 1, d)
            if mu < 0:
                raise PersistenceError(f"negative multiplicity at ({b}, {d}): rank input not monotone")
            bars.extend([(g[b], g[d])] * mu)
        mu = rk(b, n - 1) - rk(b - 1, n - 1)
        if mu < 0:
            raise PersistenceError(f"negative multiplicity at ({b}, inf)")
        bars.extend([(g[b], INF)] * mu)
    return Barcode(dim, bars)


def rank_of_barcode(bc, grid):
    grid = grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)
    n = len(grid)
    r = np.zeros((n, n), dtype=np.int64)
    for s in range(n):
        for t in range(s, n):
            r[s, t] = sum(1 for b, d in bc.bars if b <= grid[s] + TOL and d > grid[t] + TOL)
    return RankFunction(grid, r)


def module_of_barcode(bc, grid, field=2):
    """Direct sum of interval modules realizing a barcode on the grid."""
    grid = grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)
    n = len(grid)
    alive = [[i for i, (b, d) in enumerate(bc.bars) if b <= grid[t] + TOL and d > grid[t] + TOL]
             for t in range(n)]
    maps = []
    for t in range(n - 1):
        M = np.zeros((len(alive[t + 1]), len(alive[t])), dtype=np.int64)
        for j, i in enumerate(alive[t]):
            if i in alive[t + 1]:
                M[alive[t + 1].index(i), j] = 1
        maps.append(M)
    return PersistenceModule(grid, [len(a) for a in alive], maps, field)


# ---------------------------------------------------------------- distances

def _matching_ok(A, B, delta):
    n, m = len(A), len(B)
    rows, cols = [], []
    for i, (b, d) in enumerate(A):
        for j, (b2, d2) in enumerate(B):
            if max(abs(b - b2), abs(d - d2)) <= delta:
                rows.append(i)
                cols.append(j)
        if (d - b) / 2 <= delta:
            rows.append(i)
            cols.append(m + i)
    for j, (b2, d2) in enumerate(B):
        if (d2 - b2) / 2 <= delta:
            rows.append(n + j)
            cols.append(j)
        for i in range(n):
            rows.append(n + j)
            cols.append(m + i)
    size = n + m
    if size == 0:
        return True
    G = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(G, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck(b1, b2):
    """Bottleneck distance (L-infinity, diagonal allowed) between two barcodes."""
    bars1 = b1.bars if isinstance(b1, Barcode) else list(b1)
    bars2 = b2.bars if isinstance(b2, Barcode) else list(b2)
    inf1 = sorted(b for b, d in bars1 if d == INF)
    inf2 = sorted(b for b, d in bars2 if d == INF)
    if len(inf1) != len(inf2):
        return INF
    cost_inf = max((abs(a - b) for a, b in zip(inf1, inf2)), default=0.0)
    A = [(b, d) for b, d in bars1 if d < INF]
    B = [(b, d) for b, d in bars2 if d < INF]
    cands = {0.0}
    for b, d in A:
        cands.add((d - b) / 2)
        for b2, d2 in B:
            cands.add(max(abs(b - b2), abs(d - d2)))
    for b2, d2 in B:
        cands.add((d2 - b2) / 2)
    cands = sorted(cands)
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _matching_ok(A, B, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(cost_inf, cands[lo])


def is_eps_trivial(bc, eps):
    """True iff every bar has length <= eps (infinite bars never qualify)."""
    if eps < 0:
        raise PersistenceError("eps must be nonnegative")
    return all(d - b <= eps + TOL for b, d in bc.bars)


def shift_is_zero(module, eps):
    """Pointwise check that the eps-shift maps of a module vanish."""
    return all(not module.shift_map(t, eps).any() for t in range(len(module.dims)))


# ---------------------------------------------------------------- morphisms

class ModuleMorphism:
    """Grid-indexed matrices A_t -> B_{t+shift} (shift snapped up to the grid)."""

    def __init__(self, source, target, mats, shift=0.0):
        if source.grid != target.grid:
            raise PersistenceError("morphism between modules on different grids")
        self.source, self.target, self.shift = source, target, float(shift)
        self.grid = source.grid
        self.targets = [self.grid.shift(t, self.shift) for t in range(len(self.grid))]
        self.mats = []
        for t, M in enumerate(mats):
            tt = self.targets[t]
            M = np.asarray(M, dtype=np.int64)
            if M.size == 0:
                M = M.reshape(target.dims[tt], source.dims[t])
            if M.shape != (target.dims[tt], source.dims[t]):
                raise PersistenceError(f"morphism matrix {t} has shape {M.shape}")
            self.mats.append(M % source.field)

    def target_index(self, t):
        return self.targets[t]

    def naturality_failures(self):
        out = []
        p = self.source.field
        for t in range(len(self.mats) - 1):
            a = linalg.matmul(self.mats[t + 1], self.source.map(t, t + 1), p)
            b = linalg.matmul(self.target.map(self.target_index(t), self.target_index(t + 1)), self.mats[t], p)
            if not np.array_equal(a, b):
                out.append(t)
        return out

    def then(self, other):
        """other o self."""
        p = self.source.field
        mats = []
        for t, M in enumerate(self.mats):
            t1 = self.target_index(t)
            t2 = other.target_index(t1)
            mats.append(linalg.matmul(other.mats[t1], M, p))
        comp = ModuleMorphism.__new__(ModuleMorphism)
        comp.source, comp.target, comp.grid = self.source, other.target, self.grid
        comp.shift = self.shift + other.shift
        comp.mats = mats
        comp.targets = [other.target_index(self.target_index(t)) for t in range(len(mats))]
        return comp

    def kernel_module(self):
        """ker of a shift-0 morphism as a module (maps restricted from the source)."""
        self._need_unshifted()
        p = self.source.field
        bases = [linalg.nullspace(M, p) if M.shape[1] else np.zeros((0, 0), dtype=np.int64)
                 for M in self.mats]
        maps = []
        for t in range(len(bases) - 1):
            img = linalg.matmul(self.source.map(t, t + 1), bases[t], p)
            X = linalg.solve(bases[t + 1], img, p) if bases[t].shape[1] else np.zeros((bases[t + 1].shape[1], 0), dtype=np.int64)
            if X is None:
                raise PersistenceError("morphism is not natural")
            maps.append(X)
        return PersistenceModule(self.grid, [b.shape[1] for b in bases], maps, p)

    def image_module(self):
        self._need_unshifted()
        p = self.source.field
        bases = [linalg.colspace(M, p) if M.size else np.zeros((M.shape[0], 0), dtype=np.int64)
                 for M in self.mats]
        maps = []
        for t in range(len(bases) - 1):
            img = linalg.matmul(self.target.map(t, t + 1), bases[t], p)
            X = linalg.solve(bases[t + 1], img, p) if bases[t].shape[1] else np.zeros((bases[t + 1].shape[1], 0), dtype=np.int64)
            if X is None:
                raise PersistenceError("morphism is not natural")
            maps.append(X)
        return PersistenceModule(self.grid, [b.shape[1] for b in bases], maps, p)

    def cokernel_module(self):
        self._need_unshifted()
        p = self.source.field
        ims = [linalg.colspace(M, p) if M.size else np.zeros((M.shape[0], 0), dtype=np.int64)
               for M in self.mats]
        comps = [linalg.quotient_basis(ims[t], np.eye(self.target.dims[t], dtype=np.int64), p)
                 for t in range(len(ims))]
        maps = []
        for t in range(len(ims) - 1):
            img = linalg.matmul(self.target.map(t, t + 1), comps[t], p)
            M = np.hstack([ims[t + 1], comps[t + 1]])
            X = linalg.solve(M, img, p) if img.shape[1] else np.zeros((M.shape[1], 0), dtype=np.int64)
            maps.append(X[ims[t + 1].shape[1]:])
        return PersistenceModule(self.grid, [c.shape[1] for c in comps], maps, p)

    def _need_unshifted(self):
        if self.shift > TOL:
            raise PersistenceError("kernel/cokernel modules need an unshifted morphism")


@dataclass
class InterleavingCertificate:
    valid: bool
    eps: float
    grid_eps: float
    phi: object = None
    psi: object = None
    failures: list = field(default_factory=list)

    def to_json(self):
        return {"valid": self.valid, "eps": self.eps, "grid_eps": self.grid_eps,
                "failures": [str(f) for f in self.failures]}


def compose_left_right(f, g, eps):
    """Interleaving from A ->> B (eps-trivial kernel) and B >-> C (eps-trivial cokernel).

    Phi = g o f and Psi = Sigma^eps_A o Phi^{-1} o Sigma^eps_C, found by linear solves.
    Returns an InterleavingCertificate whose Phi/Psi verify the 2*eps diagram pointwise.
    """
    A, B, C = f.source, f.target, g.target
    p = A.field
    grid = A.grid
    n = len(grid)
    phi = f.then(g)
    failures = []
    psi = []
    grid_eps = 0.0
    for t in range(n):
        t1 = grid.shift(t, eps)
        t2 = grid.shift(t1, eps)
        grid_eps = max(grid_eps, grid[t2] - grid[t])
        Y = C.map(t, t1)
        W = linalg.solve(g.mats[t1], Y, p) if Y.shape[1] else np.zeros((B.dims[t1], 0), dtype=np.int64)
        if W is None:
            failures.append(f"cokernel not {eps}-trivial at grid value {grid[t]}")
            psi.append(np.zeros((A.dims[t2], C.dims[t]), dtype=np.int64))
            continue
        Z = linalg.solve(f.mats[t1], W, p) if W.shape[1] else np.zeros((A.dims[t1], 0), dtype=np.int64)
        if Z is None:
            failures.append(f"f not surjective at grid value {grid[t1]}")
            psi.append(np.zeros((A.dims[t2], C.dims[t]), dtype=np.int64))
            continue
        psi.append(linalg.matmul(A.map(t1, t2), Z, p))
    if not failures:
        for t in range(n):
            t2 = grid.shift(grid.shift(t, eps), eps)
            if not np.array_equal(linalg.matmul(psi[t], phi.mats[t], p), A.map(t, t2)):
                failures.append(f"Psi o Phi != shift at grid value {grid[t]}")
            if not np.array_equal(linalg.matmul(phi.mats[t2], psi[t], p), C.map(t, t2)):
                failures.append(f"Phi o Psi != shift at grid value {grid[t]}")
            if t + 1 < n:
                u2 = grid.shift(grid.shift(t + 1, eps), eps)
                lhs = linalg.matmul(psi[t + 1], C.map(t, t + 1), p)
                rhs = linalg.matmul(A.map(t2, u2), psi[t], p)
                if not np.array_equal(lhs, rhs):
                    failures.append(f"Psi not natural at grid value {grid[t]}")
    return InterleavingCertificate(not failures, 2 * eps, grid_eps, phi, psi, failures)


def module_morphism(source, target, mats, shift=0.0):
    return ModuleMorphism(source, target, mats, shift)
