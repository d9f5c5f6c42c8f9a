"""Grid-indexed families of based chain complexes with a column filtration.

This is the common currency of the spectral sequence engine: a filtered
complex, a blowup complex, a multinerve and the two-cover complex of
homology modules all become a ChainFamily.
"""
import numpy as np

from . import linalg
from .complex import FiltrationGrid
from .persistence import PersistenceModule


class ChainFamily:
    """Per grid index t: basis keys with degree and filtration level, a square
    differential D[t] (column j = boundary of basis element j), and structure
    maps step[t] from index t to t+1."""

    def __init__(self, grid, field, basis, degree, filt, D, step):
        self.grid = grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)
        self.field = field
        self.basis = basis
        self.degree = [np.asarray(d, dtype=np.int64) for d in degree]
        self.filt = [np.asarray(f, dtype=np.int64) for f in filt]
        self.D = D
        self.step = step
        self._blocks = {}

    def __len__(self):
        return len(self.grid)

    @property
    def max_filt(self):
        return max((int(f.max()) for f in self.filt if f.size), default=0)

    @property
    def max_degree(self):
        return max((int(d.max()) for d in self.degree if d.size), default=0)

    def block(self, t, n, pmax=None, pmin=None):
        """Indices of degree-n basis elements at t with pmin < filt <= pmax."""
        key = (t, n, pmax, pmin)
        if key not in self._blocks:
            m = self.degree[t] == n
            if pmax is not None:
                m &= self.filt[t] <= pmax
            if pmin is not None:
                m &= self.filt[t] > pmin
            self._blocks[key] = np.nonzero(m)[0]
        return self._blocks[key]

    def diff_block(self, t, n):
        """Matrix of D from degree n to degree n-1 at t, in block coordinates."""
        rows, cols = self.block(t, n - 1), self.block(t, n)
        return self.D[t][np.ix_(rows, cols)]

    def step_block(self, t, n, s=None):
        """Structure map t -> s (default t+1) restricted to degree n blocks."""
        s = t + 1 if s is None else s
        M = np.eye(len(self.block(t, n)), dtype=np.int64)
        for u in range(t, s):
            S = self.step[u][np.ix_(self.block(u + 1, n), self.block(u, n))]
            M = linalg.matmul(S, M, self.field)
        return M

    def check(self):
        """D^2 = 0, D preserves filtration and lowers degree, steps are chain maps."""
        p = self.field
        problems = []
        for t in range(len(self.grid)):
            D = self.D[t]
            if linalg.matmul(D, D, p).any():
                problems.append(f"D^2 != 0 at index {t}")
            nz = np.nonzero(D)
            for i, j in zip(*nz):
                if self.degree[t][i] != self.degree[t][j] - 1:
                    problems.append(f"D does not lower degree at index {t}")
                    break
                if self.filt[t][i] > self.filt[t][j]:
                    problems.append(f"D raises filtration at index {t}")
                    break
            if t + 1 < len(self.grid):
                S = self.step[t]
                if not np.array_equal(linalg.matmul(S, D, p), linalg.matmul(self.D[t + 1], S, p)):
                    problems.append(f"structure map {t} is not a chain map")
        return problems

    # homology
    def homology_at(self, t, n):
        """(reps, coordinate solver) for H_n at index t, in degree-n block coordinates."""
        p = self.field
        Dn = self.diff_block(t, n)
        Z = linalg.nullspace(Dn, p) if Dn.shape[1] else np.zeros((0, 0), dtype=np.int64)
        B = self.diff_block(t, n + 1)
        B = linalg.colspace(B, p) if B.shape[1] else B
        if Z.shape[0] == 0:
            Z = np.zeros((len(self.block(t, n)), 0), dtype=np.int64)
        if B.shape[0] != Z.shape[0]:
            B = np.zeros((Z.shape[0], 0), dtype=np.int64)
        reps = linalg.quotient_basis(B, Z, p)
        return Subquotient(reps, B, p)

    def homology_module(self, n):
        hs = [self.homology_at(t, n) for t in range(len(self.grid))]
        maps = []
        for t in range(len(hs) - 1):
            img = linalg.matmul(self.step_block(t, n), hs[t].reps, self.field)
            maps.append(hs[t + 1].coords(img))
        mod = PersistenceModule(self.grid, [h.dim for h in hs], maps, self.field)
        mod.subquotients = hs
        return mod

    @classmethod
    def from_complex(cls, K, filt=None):
        """The inclusion family of a filtered complex; ``filt`` maps cell id -> level."""
        p = K.field
        basis, degree, filts, D, step = [], [], [], [], []
        for t in range(len(K.grid)):
            ids = [c.id for c in K.cells if c.birth <= t]
            pos = {c: i for i, c in enumerate(ids)}
            M = np.zeros((len(ids), len(ids)), dtype=np.int64)
            for j, c in enumerate(ids):
                for f, co in K.cells[c].boundary:
                    M[pos[f], j] = co % p
            basis.append(ids)
            degree.append([K.cells[c].dim for c in ids])
            filts.append([0 if filt is None else filt[c] for c in ids])
            D.append(M)
        for t in range(len(K.grid) - 1):
            nxt = {c: i for i, c in enumerate(basis[t + 1])}
            S = np.zeros((len(basis[t + 1]), len(basis[t])), dtype=np.int64)
            for j, c in enumerate(basis[t]):
                S[nxt[c], j] = 1
            step.append(S)
        fam = cls(K.grid, p, basis, degree, filts, D, step)
        fam.source_complex = K
        return fam


class Subquotient:
    """A subquotient N/Q of a coordinate space, with chosen representatives."""

    def __init__(self, reps, den, p):
        self.reps = reps
        self.den = den
        self.p = p
        self.dim = reps.shape[1]
        self._M = np.hstack([den, reps]) if den.shape[1] or reps.shape[1] else np.zeros((reps.shape[0], 0), dtype=np.int64)

    def coords(self, V):
        V = np.asarray(V, dtype=np.int64)
        if V.ndim == 1:
            V = V[:, None]
        if V.shape[1] == 0 or self.dim == 0:
            if V.shape[1] and self._M.shape[1] == 0 and np.any(V % self.p):
                raise ValueError("vector outside the numerator")
            return np.zeros((self.dim, V.shape[1]), dtype=np.int64)
        X = linalg.solve(self._M, V % self.p, self.p)
        if X is None:
            raise ValueError("vector outside the numerator")
        return X[self.den.shape[1]:]

    def contains(self, V):
        V = np.asarray(V, dtype=np.int64)
        if self._M.shape[1] == 0:
            return not np.any(V % self.p)
        return linalg.solve(self._M, V % self.p, self.p) is not None
