"""Double complexes of diagrams, persistent spectral sequence pages, page
morphisms and (eps, n)-interleaving checks."""
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .chains import ChainFamily, Subquotient
from .complex import TOL
from .diagrams import faces_of
from .persistence import PersistenceModule


def inclusion_family(grid, p, keys, births, degree, filt, Dfull):
    """ChainFamily of the subcomplexes {births <= t} of a based complex."""
    births = np.asarray(births)
    basis, deg, fl, Ds, steps, alive = [], [], [], [], [], []
    for t in range(len(grid)):
        a = np.nonzero(births <= t)[0]
        alive.append(a)
        basis.append([keys[i] for i in a])
        deg.append(np.asarray(degree)[a])
        fl.append(np.asarray(filt)[a])
        Ds.append(Dfull[np.ix_(a, a)] % p)
    for t in range(len(grid) - 1):
        pos = {int(i): j for j, i in enumerate(alive[t + 1])}
        S = np.zeros((len(alive[t + 1]), len(alive[t])), dtype=np.int64)
        for j, i in enumerate(alive[t]):
            S[pos[int(i)], j] = 1
        steps.append(S)
    fam = ChainFamily(grid, p, basis, deg, fl, Ds, steps)
    fam.alive = alive
    return fam


class DoubleComplex:
    """C_{p,q} = sum over p-simplices sigma of C_q(D(sigma)), with
    d^V = (-1)^p times the fiber boundary and d^H the alternating sum of face maps."""

    def __init__(self, D):
        self.diagram = D
        self.grid = D.grid
        self.field = D.field
        p = D.field
        keys = [(s, c.id) for s in D.index for c in D.fibers[s].cells]
        keys.sort(key=lambda k: (len(k[0]), k[0], k[1]))
        self.keys = keys
        self.position = {k: i for i, k in enumerate(keys)}
        n = len(keys)
        self.column = np.array([len(s) - 1 for s, _ in keys], dtype=np.int64)
        self.row = np.array([D.fibers[s].cells[c].dim for s, c in keys], dtype=np.int64)
        self.births = np.array([D.fibers[s].cells[c].birth for s, c in keys], dtype=np.int64)
        dV = np.zeros((n, n), dtype=np.int64)
        dH = np.zeros((n, n), dtype=np.int64)
        for j, (s, c) in enumerate(keys):
            sv = 1 if (len(s) - 1) % 2 == 0 else -1
            for f, k in D.fibers[s].cells[c].boundary:
                i = self.position[(s, f)]
                dV[i, j] = (dV[i, j] + sv * k) % p
            for m, t in enumerate(faces_of(s)):
                sh = 1 if m % 2 == 0 else -1
                for d, a in D.face_map(t, s).get(c, {}).items():
                    i = self.position[(t, d)]
                    dH[i, j] = (dH[i, j] + sh * a) % p
        self.dV, self.dH = dV, dH
        self._family = None

    def identities(self):
        p = self.field
        mm = lambda A, B: linalg.matmul(A, B, p)
        return {
            "dV o dV = 0": not mm(self.dV, self.dV).any(),
            "dH o dH = 0": not mm(self.dH, self.dH).any(),
            "dV dH + dH dV = 0": not ((mm(self.dV, self.dH) + mm(self.dH, self.dV)) % p).any(),
        }

    def check(self):
        bad = [k for k, ok in self.identities().items() if not ok]
        if bad:
            raise ValueError("double complex identities fail: " + ", ".join(bad))
        return True

    def entry_dims(self, t):
        out = {}
        for i in np.nonzero(self.births <= t)[0]:
            k = (int(self.column[i]), int(self.row[i]))
            out[k] = out.get(k, 0) + 1
        return out

    def family(self):
        if self._family is None:
            self._family = inclusion_family(self.grid, self.field, self.keys, self.births,
                                            self.column + self.row, self.column,
                                            (self.dV + self.dH) % self.field)
        return self._family


def double_complex(D):
    return DoubleComplex(D)


class SpectralSequence:
    """Pages of the spectral sequence of a column-filtered chain family.

    Z^r_p = {x in F_p : Dx in F_{p-r}},
    E^r_p = Z^r_p / (Z^{r-1}_{p-1} + D Z^{r-1}_{p+r-1}),
    bidegree (p, q) with total degree n = p + q.
    """

    def __init__(self, family, r_max=None, name=None):
        self.family = family
        self.field = family.field
        self.grid = family.grid
        self.P = family.max_filt
        self.stable_page = self.P + 1
        self.r_max = self.stable_page if r_max is None else max(r_max, 0)
        self.name = name
        self._Z = {}
        self._E = {}
        self._mod = {}
        self._dr = {}

    def page_index(self, r):
        return min(r, self.stable_page) if r >= 0 else r

    # subquotients
    def _cycles(self, t, r, p, n):
        fam = self.family
        full = fam.block(t, n)
        if p < 0 or len(full) == 0:
            return np.zeros((len(full), 0), dtype=np.int64)
        if r > p:
            r = p + 1
        if p > self.P + r:
            p = self.P + r
        key = (t, r, p, n)
        if key in self._Z:
            return self._Z[key]
        cols = fam.block(t, n, pmax=p)
        rows = fam.block(t, n - 1, pmin=p - r)
        if len(cols) == 0:
            Z = np.zeros((len(full), 0), dtype=np.int64)
        else:
            A = fam.D[t][np.ix_(rows, cols)]
            N = linalg.nullspace(A, self.field) if len(rows) else np.eye(len(cols), dtype=np.int64)
            Z = np.zeros((len(full), N.shape[1]), dtype=np.int64)
            Z[np.searchsorted(full, cols)] = N
        self._Z[key] = Z
        return Z

    def space(self, r, p, q, t):
        r = self.page_index(r)
        n = p + q
        key = (r, p, n, t)
        if key in self._E:
            return self._E[key]
        fam = self.family
        num = self._cycles(t, r, p, n)
        a = self._cycles(t, r - 1, p - 1, n)
        up = self._cycles(t, r - 1, p + r - 1, n + 1)
        if up.shape[1] and len(fam.block(t, n)):
            b = linalg.matmul(fam.diff_block(t, n + 1), up, self.field)
        else:
            b = np.zeros((num.shape[0], 0), dtype=np.int64)
        den = np.hstack([a, b])
        den = linalg.colspace(den, self.field) if den.shape[1] else den
        reps = linalg.quotient_basis(den, num, self.field)
        sq = Subquotient(reps, den, self.field)
        self._E[key] = sq
        return sq

    def dim(self, r, p, q, t):
        return self.space(r, p, q, t).dim

    def dims(self, r, p, q):
        return [self.dim(r, p, q, t) for t in range(len(self.grid))]

    def module(self, r, p, q):
        r = self.page_index(r)
        key = (r, p, q)
        if key not in self._mod:
            fam = self.family
            n = p + q
            sp = [self.space(r, p, q, t) for t in range(len(self.grid))]
            maps = []
            for t in range(len(sp) - 1):
                img = linalg.matmul(fam.step_block(t, n), sp[t].reps, self.field)
                maps.append(sp[t + 1].coords(img))
            self._mod[key] = PersistenceModule(self.grid, [s.dim for s in sp], maps, self.field)
        return self._mod[key]

    def barcode(self, r, p, q):
        return self.module(r, p, q).barcode(q)

    def differential(self, r, p, q, t):
        """d_r: E^r_{p,q} -> E^r_{p-r,q+r-1} at grid index t."""
        key = (r, p, q, t)
        if key not in self._dr:
            src = self.space(r, p, q, t)
            tgt = self.space(r, p - r, q + r - 1, t)
            n = p + q
            if src.dim == 0 or tgt.dim == 0 or r >= self.stable_page:
                M = np.zeros((tgt.dim, src.dim), dtype=np.int64)
            else:
                img = linalg.matmul(self.family.diff_block(t, n), src.reps, self.field)
                M = tgt.coords(img)
            self._dr[key] = M
        return self._dr[key]

    def iota(self, r, p, q, t):
        """E^{r+1}_{p,q} -> E^r_{p,q} sending a class to the class of its representative."""
        hi = self.space(r + 1, p, q, t)
        lo = self.space(r, p, q, t)
        return lo.coords(hi.reps)

    def bidegrees(self):
        Q = self.family.max_degree
        return [(p, q) for p in range(self.P + 1) for q in range(-self.P, Q + 1) if 0 <= p + q <= Q]

    def entries(self, r):
        out = []
        for p, q in self.bidegrees():
            if any(self.dims(r, p, q)):
                out.append((p, q))
        return out

    def total_dims(self, r, n):
        return [sum(self.dim(r, p, n - p, t) for p in range(self.P + 1)) for t in range(len(self.grid))]

    def check_recursion(self, r_max=None):
        """dim E^{r+1} = dim ker d_r - dim im d_r at every (p, q, t)."""
        r_max = self.stable_page if r_max is None else r_max
        fails = []
        for r in range(0, r_max):
            for p, q in self.bidegrees():
                for t in range(len(self.grid)):
                    out = self.differential(r, p, q, t)
                    inc = self.differential(r, p + r, q - r + 1, t)
                    k = out.shape[1] - linalg.rank(out, self.field) if out.size else out.shape[1]
                    i = linalg.rank(inc, self.field) if inc.size else 0
                    if self.dim(r + 1, p, q, t) != k - i:
                        fails.append((r, p, q, t))
        return fails

    def to_json(self, r, with_differentials=False):
        from .io import bars_json
        entries = []
        for p, q in self.bidegrees():
            bc = self.barcode(r, p, q)
            if len(bc):
                entries.append({"p": p, "q": q, "bars": bars_json(bc)})
        out = {"r": r, "entries": entries}
        if with_differentials:
            diffs = []
            for p, q in self.bidegrees():
                for t in range(len(self.grid)):
                    M = self.differential(r, p, q, t)
                    nz = np.nonzero(M)
                    if len(nz[0]):
                        diffs.append({"p": p, "q": q, "t": t,
                                      "entries": [[int(i), int(j), int(M[i, j])] for i, j in zip(*nz)]})
            out["differentials"] = diffs
        return out


def compute_pages(dc, r_max=None):
    fam = dc.family() if isinstance(dc, DoubleComplex) else dc
    ss = SpectralSequence(fam, r_max)
    ss.source = dc
    return ss


def e_infinity_check(ss, target=None):
    """Sum over p + q = n of dim E^inf_{p,q}(t) against dim H_n(target)(t)."""
    if target is None:
        fam = ss.family
    elif isinstance(target, ChainFamily):
        fam = target
    else:
        K = getattr(target, "complex", target)
        fam = ChainFamily.from_complex(K)
    report = {"ok": True, "checked": [], "failures": []}
    for n in range(ss.family.max_degree + 1):
        lhs = ss.total_dims(ss.stable_page, n)
        rhs = fam.homology_module(n).dims
        report["checked"].append({"n": n, "einf": lhs, "homology": list(rhs)})
        for t, (a, b) in enumerate(zip(lhs, rhs)):
            if a != b:
                report["ok"] = False
                report["failures"].append({"n": n, "t": t, "einf": a, "homology": int(b)})
    return report


class PageMorphism:
    """Matrices E^r_{p,q}(A)_t -> E^r_{p,q}(B)_{targets[t]} for r >= start.

    Built either from a filtration-preserving chain map family (every page
    computed directly) or from explicit page-``start`` matrices, propagated to
    later pages through E^{r+1} = H(E^r, d_r).
    """

    def __init__(self, source, target, shift=0.0, start=0, targets=None, chain_maps=None, page_mats=None):
        self.source = source
        self.target = target
        self.shift = float(shift)
        self.start = start
        g = source.grid
        if targets is None:
            targets = [g.shift(t, shift) for t in range(len(g))]
        self.targets = list(targets)
        self.chain_maps = chain_maps
        self._mats = dict(page_mats or {})

    def get(self, r, p, q, t):
        if r < self.start:
            raise ValueError(f"morphism is defined from page {self.start}")
        r = min(r, max(self.source.stable_page, self.target.stable_page, self.start))
        key = (r, p, q, t)
        if key in self._mats:
            return self._mats[key]
        A, B = self.source, self.target
        tt = self.targets[t]
        sa, sb = A.space(r, p, q, t), B.space(r, p, q, tt)
        if sa.dim == 0 or sb.dim == 0:
            M = np.zeros((sb.dim, sa.dim), dtype=np.int64)
        elif self.chain_maps is not None:
            n = p + q
            C = self.chain_maps[t][np.ix_(B.family.block(tt, n), A.family.block(t, n))]
            img = linalg.matmul(C, sa.reps, A.field)
            try:
                M = sb.coords(img)
            except ValueError:
                raise ValueError(f"chain map breaks the filtration at page {r}, entry ({p},{q}), index {t}")
        elif r > self.start:
            M = self._propagate(r, p, q, t)
        else:
            M = np.zeros((sb.dim, sa.dim), dtype=np.int64)
        self._mats[key] = M
        return M

    def _propagate(self, r, p, q, t):
        A, B = self.source, self.target
        tt = self.targets[t]
        prev = self.get(r - 1, p, q, t)
        rhs = linalg.matmul(prev, A.iota(r - 1, p, q, t), A.field)
        ib = B.iota(r - 1, p, q, tt)
        im = B.differential(r - 1, p + r - 1, q - r + 2, tt)
        X = linalg.solve(np.hstack([ib, im]), rhs, A.field)
        if X is None:
            raise ValueError(f"page map does not commute with d_{r-1} at ({p},{q}), index {t}")
        return X[:ib.shape[1]]

    def then(self, other):
        """Composite other o self (shifts add; targets compose)."""
        targets = [other.targets[self.targets[t]] for t in range(len(self.targets))]
        start = max(self.start, other.start)
        out = PageMorphism(self.source, other.target, self.shift + other.shift, start, targets)
        first, second = self, other

        def comp(r, p, q, t):
            return linalg.matmul(second.get(r, p, q, first.targets[t]), first.get(r, p, q, t), self.source.field)
        out.get = comp
        return out


def induced_page_morphism(source, target, chain_maps, shift=0.0, targets=None):
    return PageMorphism(source, target, shift, 0, targets, chain_maps=chain_maps)


def identity_page_morphism(ss, start=0):
    fam = ss.family
    maps = [np.eye(len(fam.basis[t]), dtype=np.int64) for t in range(len(ss.grid))]
    return PageMorphism(ss, ss, 0.0, start, list(range(len(ss.grid))), chain_maps=maps)


def zero_page_morphism(A, B, start=0):
    maps = [np.zeros((len(B.family.basis[t]), len(A.family.basis[t])), dtype=np.int64) for t in range(len(A.grid))]
    return PageMorphism(A, B, 0.0, start, list(range(len(A.grid))), chain_maps=maps)


@dataclass
class PageInterleavingReport:
    ok: bool
    eps: float
    n: int
    pages: list
    stable_page: int
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "eps": self.eps, "n": self.n, "pages_checked": self.pages,
                "stable_page": self.stable_page, "failures": self.failures[:10]}


def _padded(f, target_ss, r, p, q, t, goal):
    """f at (r,p,q,t) followed by the target structure map up to index ``goal``."""
    M = f.get(r, p, q, t)
    tt = f.targets[t]
    if tt == goal:
        return M
    return linalg.matmul(target_ss.module(r, p, q).map(tt, goal), M, target_ss.field)


def check_page_interleaving(A, B, psi, phi, eps, n, max_failures=5):
    """Verify that psi: A -> B[eps] and phi: B -> A[eps] form an (eps, n)-interleaving
    on every page from n to stabilization and at every grid index."""
    g = A.grid
    stable = max(A.stable_page, B.stable_page)
    rep = PageInterleavingReport(True, float(eps), n, [], stable)

    def fail(msg):
        rep.ok = False
        rep.failures.append(msg)
        return len(rep.failures) >= max_failures

    if B.grid != g:
        fail("spectral sequences live on different grids")
        return rep
    if psi.shift > eps + TOL or phi.shift > eps + TOL:
        fail(f"morphism shift exceeds eps={eps}")
        return rep
    if psi.start > n or phi.start > n:
        fail(f"morphisms are not defined from page {n}")
        return rep
    T = len(g)
    s1 = [g.shift(t, eps) for t in range(T)]
    for t in range(T):
        if psi.targets[t] > s1[t] or phi.targets[t] > s1[t]:
            fail(f"morphism target index beyond t+eps at index {t}")
            return rep
    bideg = sorted(set(A.bidegrees()) | set(B.bidegrees()))
    p_ = A.field
    for r in range(n, stable + 1):
        rep.pages.append(r)
        try:
            for p, q in bideg:
                MA, MB = A.module(r, p, q), B.module(r, p, q)
                for t in range(T):
                    t1 = s1[t]
                    t2 = s1[t1]
                    for X, Y, f, h, MX, name in ((A, B, psi, phi, MA, "phi o psi"), (B, A, phi, psi, MB, "psi o phi")):
                        F = _padded(f, Y, r, p, q, t, t1)
                        H = _padded(h, X, r, p, q, t1, t2)
                        lhs = linalg.matmul(H, F, p_)
                        if not np.array_equal(lhs % p_, MX.map(t, t2) % p_):
                            if fail(f"{name} != shift by 2eps at page {r}, entry ({p},{q}), index {t}"):
                                return rep
                    for f, X, Y, name in ((psi, A, B, "psi"), (phi, B, A, "phi")):
                        F = _padded(f, Y, r, p, q, t, t1)
                        if t + 1 < T:
                            F1 = _padded(f, Y, r, p, q, t + 1, s1[t + 1])
                            lhs = linalg.matmul(F1, X.module(r, p, q).map(t, t + 1), p_)
                            rhs = linalg.matmul(Y.module(r, p, q).map(t1, s1[t + 1]), F, p_)
                            if not np.array_equal(lhs, rhs):
                                if fail(f"{name} is not natural at page {r}, entry ({p},{q}), index {t}"):
                                    return rep
                        F2 = _padded(f, Y, r, p - r, q + r - 1, t, t1)
                        lhs = linalg.matmul(F2, X.differential(r, p, q, t), p_)
                        rhs = linalg.matmul(Y.differential(r, p, q, t1), F, p_)
                        if not np.array_equal(lhs, rhs):
                            if fail(f"{name} does not commute with d_{r} at ({p},{q}), index {t}"):
                                return rep
        except ValueError as exc:
            fail(str(exc))
            return rep
    return rep
