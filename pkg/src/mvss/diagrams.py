"""Diagrams of filtered complexes over a simplicial index, their blowup
realizations, pi_0 diagrams, multinerves and join diagrams."""
from itertools import combinations, product

import numpy as np

from .chains import ChainFamily
from .complex import Cell, ComplexError, FilteredComplex


class DiagramError(ValueError):
    pass


def faces_of(sigma):
    """Codimension-one faces of an index simplex, in removal order i = 0..dim."""
    return [sigma[:i] + sigma[i + 1:] for i in range(len(sigma))] if len(sigma) > 1 else []


def _compose(g, f, field):
    """Sparse composite g o f; both map cell -> {cell: coeff}."""
    out = {}
    for c, img in f.items():
        acc = {}
        for d, a in img.items():
            for e, b in g.get(d, {}).items():
                acc[e] = (acc.get(e, 0) + a * b) % field
        out[c] = {e: v for e, v in acc.items() if v}
    return out


def _same_map(f, g):
    keys = set(f) | set(g)
    return all(f.get(k, {}) == g.get(k, {}) for k in keys)


class Diagram:
    """Contravariant diagram over a simplicial index: a fiber per simplex and a
    chain map D(tau <= sigma): D(sigma) -> D(tau) per face relation.

    ``face_map(tau, sigma)`` returns the map as {cell: {cell: coeff}}; maps are
    fixed chain maps of filtered complexes (the fully filtered class).
    """

    def __init__(self, index, fibers, face_map, grid, field, name=None):
        self.index = sorted({tuple(s) for s in index}, key=lambda s: (len(s), s))
        self.fibers = fibers
        self._map_fn = face_map
        self._maps = {}
        self.grid = grid
        self.field = field
        self.name = name

    def __repr__(self):
        return f"Diagram({self.name or ''}, {len(self.index)} simplices, {self.size()} cells)"

    def size(self):
        return sum(len(self.fibers[s].cells) for s in self.index)

    @property
    def dim(self):
        return max(len(s) for s in self.index) - 1

    def face_map(self, tau, sigma):
        key = (tuple(tau), tuple(sigma))
        if key not in self._maps:
            if key[0] == key[1]:
                self._maps[key] = {c: {c: 1} for c in range(len(self.fibers[key[1]].cells))}
            else:
                self._maps[key] = self._map_fn(*key)
        return self._maps[key]

    def set_face_map(self, tau, sigma, m):
        """Override a face map (used for fault injection in tests)."""
        self._maps[(tuple(tau), tuple(sigma))] = m

    def validate(self, raise_on_error=True):
        """Return a list of problems: index closure, grids, chain maps, births, functoriality."""
        p = self.field
        problems = []
        idx = set(self.index)
        for s in self.index:
            for t in faces_of(s):
                if t not in idx:
                    problems.append(f"index not closed: face {t} of {s} missing")
            K = self.fibers[s]
            if K.field != p or K.grid != self.grid:
                problems.append(f"fiber {s} has a different field or grid")
        for s in self.index:
            Ks = self.fibers[s]
            for t in faces_of(s):
                Kt = self.fibers[t]
                f = self.face_map(t, s)
                for c in Ks.cells:
                    img = f.get(c.id, {})
                    if any(Kt.cells[d].birth > c.birth or Kt.cells[d].dim != c.dim for d in img):
                        problems.append(f"face map {t}<{s} breaks births or degree at cell {c.id}")
                        break
                    lhs = {}
                    for d, a in img.items():
                        for e, b in Kt.cells[d].boundary:
                            lhs[e] = (lhs.get(e, 0) + a * b) % p
                    rhs = {}
                    for e, b in c.boundary:
                        for g, a in f.get(e, {}).items():
                            rhs[g] = (rhs.get(g, 0) + a * b) % p
                    if {k: v for k, v in lhs.items() if v} != {k: v for k, v in rhs.items() if v}:
                        problems.append(f"face map {t}<{s} is not a chain map at cell {c.id}")
                        break
                for r in faces_of(t):
                    comp = _compose(self.face_map(r, t), f, p)
                    if not _same_map(comp, self.face_map(r, s)):
                        problems.append(f"functoriality fails for {r} < {t} < {s}")
        if problems and raise_on_error:
            raise DiagramError("; ".join(problems[:5]))
        return problems

    def to_json(self):
        from .io import complex_to_json
        out = {"field": self.field, "grid": list(self.grid), "fibers": [], "face_maps": []}
        for s in self.index:
            out["fibers"].append({"sigma": list(s), "complex": complex_to_json(self.fibers[s])})
            for t in faces_of(s):
                m = self.face_map(t, s)
                out["face_maps"].append({"tau": list(t), "sigma": list(s),
                                         "entries": [[c, d, v] for c in sorted(m) for d, v in sorted(m[c].items())]})
        return out


def point_diagram(grid, field=2, index=((0,),)):
    """Each fiber a single vertex born at the grid minimum; identity face maps."""
    pt = FilteredComplex([Cell(0, 0, 0, (), (0,))], grid, field)
    fibers = {tuple(s): pt for s in index}
    return Diagram(index, fibers, lambda t, s: {0: {0: 1}}, grid, field, "point")


def cover_diagram(X, U):
    """The diagram of pieces X^U over the nerve with inclusion face maps."""
    index = U.nerve_simplices()
    fibers, new_of, old_of = {}, {}, {}
    for s in index:
        sub, n_of, members = X.subcomplex(U.piece(s))
        fibers[s], new_of[s], old_of[s] = sub, n_of, members

    def inclusion(t, s):
        nt = new_of[t]
        return {i: {nt[old]: 1} for i, old in enumerate(old_of[s])}

    D = Diagram(index, fibers, inclusion, X.grid, X.field, "cover")
    D.cover = U
    D.old_of = old_of
    return D


class BlowupComplex:
    """A realization: the complex of cells (sigma, c) plus bookkeeping."""

    def __init__(self, complex_, sigma_of, fiber_of, diagram):
        self.complex = complex_
        self.sigma_of = sigma_of
        self.fiber_of = fiber_of
        self.column = [len(s) - 1 for s in sigma_of]
        self.diagram = diagram
        self.cell_index = {(s, c): i for i, (s, c) in enumerate(zip(sigma_of, fiber_of))}

    def __len__(self):
        return len(self.complex.cells)

    def family(self):
        """Chain family filtered by columns F^p (p = dim sigma)."""
        return ChainFamily.from_complex(self.complex, self.column)

    def project_base(self):
        """Cells grouped by index simplex."""
        out = {}
        for i, s in enumerate(self.sigma_of):
            out.setdefault(s, []).append(i)
        return out

    def to_json(self):
        cells = []
        for c in self.complex.cells:
            cells.append({"id": c.id, "dim": c.dim, "birth": c.birth,
                          "boundary": [[f, k] for f, k in c.boundary],
                          "sigma": list(self.sigma_of[c.id]), "fiber_cell": self.fiber_of[c.id]})
        return {"field": self.complex.field, "grid": list(self.complex.grid), "cells": cells}


def blowup_boundary(D, sigma, c):
    """delta^Delta of (sigma, c) as {(tau, d): coeff}."""
    p = D.field
    out = {}
    for i, t in enumerate(faces_of(sigma)):
        sgn = 1 if i % 2 == 0 else -1
        for d, a in D.face_map(t, sigma).get(c, {}).items():
            out[(t, d)] = (out.get((t, d), 0) + sgn * a) % p
    sgn = 1 if (len(sigma) - 1) % 2 == 0 else -1
    for d, a in D.fibers[sigma].cells[c].boundary:
        out[(sigma, d)] = (out.get((sigma, d), 0) + sgn * a) % p
    return {k: v for k, v in out.items() if v}


def realization(D, validate=True):
    """Geometric realization (blowup complex) of a diagram."""
    if validate:
        D.validate()
    items = []
    for s in D.index:
        for c in D.fibers[s].cells:
            items.append((len(s) - 1 + c.dim, c.birth, len(s), s, c.id))
    items.sort()
    ids = {(it[3], it[4]): i for i, it in enumerate(items)}
    cells, sig, fib = [], [], []
    for i, (dim, birth, _, s, c) in enumerate(items):
        bd = blowup_boundary(D, s, c)
        lab = (s, D.fibers[s].cells[c].label if D.fibers[s].cells[c].label is not None else c)
        cells.append(Cell(i, dim, birth, tuple(sorted((ids[k], v) for k, v in bd.items())), lab))
        sig.append(s)
        fib.append(c)
    K = FilteredComplex(cells, D.grid, D.field, validate=validate)
    return BlowupComplex(K, sig, fib, D)


def total_complex_check(D):
    """Verify psi: (sigma, c) -> (c)_sigma intertwines delta^Delta with d^H + d^V
    and preserves the column filtration, at every grid index.

    d^H and d^V are assembled here from the fibers and face maps directly.
    """
    from .spectral import double_complex
    B = realization(D, validate=False)
    dc = double_complex(D)
    p = D.field
    report = {"grid_indices": len(D.grid), "cells": len(B), "identities": [], "ok": True, "failures": []}
    n = len(B)
    # psi as a permutation: realization id -> double complex position
    perm = np.array([dc.position[(B.sigma_of[i], B.fiber_of[i])] for i in range(n)], dtype=np.int64)
    Psi = np.zeros((n, n), dtype=np.int64)
    Psi[perm, np.arange(n)] = 1
    Dr = np.zeros((n, n), dtype=np.int64)
    for c in B.complex.cells:
        for f, k in c.boundary:
            Dr[f, c.id] = k % p
    Dt = (dc.dV + dc.dH) % p
    for name, ok in dc.identities().items():
        report["identities"].append(name)
        if not ok:
            report["ok"] = False
            report["failures"].append(name)
    births = np.array([c.birth for c in B.complex.cells])
    for t in range(len(D.grid)):
        alive = np.nonzero(births <= t)[0]
        lhs = (Psi[:, alive] @ Dr[np.ix_(alive, alive)]) % p
        rhs = (Dt[:, perm[alive]]) % p
        # restrict rows to cells alive at t
        if not np.array_equal(lhs, rhs):
            report["ok"] = False
            report["failures"].append(f"psi does not intertwine at grid index {t}")
            break
        if any(dc.column[perm[i]] != B.column[i] for i in alive):
            report["ok"] = False
            report["failures"].append(f"psi breaks F^p at grid index {t}")
            break
    report["identities"].append("psi o delta = (dH + dV) o psi at every grid index")
    report["identities"].append("psi preserves F^p")
    return report


# pi_0 diagrams and multinerves
class _UF:
    def __init__(self, items):
        self.par = {i: i for i in items}

    def find(self, x):
        while self.par[x] != x:
            self.par[x] = self.par[self.par[x]]
            x = self.par[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.par[rb] = ra


class Pi0Diagram:
    """Connected components of each fiber per grid index.

    comp[sigma][t] maps each vertex alive at t to the least vertex id of its
    component; merge maps and face maps act on these representatives.
    """

    def __init__(self, D):
        self.diagram = D
        self.grid = D.grid
        self.field = D.field
        self.index = D.index
        self.comp = {}
        for s in D.index:
            K = D.fibers[s]
            per_t = []
            for t in range(len(D.grid)):
                verts = [c.id for c in K.cells if c.dim == 0 and c.birth <= t]
                uf = _UF(verts)
                for c in K.cells:
                    if c.dim == 1 and c.birth <= t:
                        ends = [f for f, _ in c.boundary]
                        if len(ends) == 2:
                            uf.union(ends[0], ends[1])
                per_t.append({v: uf.find(v) for v in verts})
            self.comp[s] = per_t

    def components(self, sigma, t):
        return sorted(set(self.comp[sigma][t].values()))

    def merge(self, sigma, t, rep):
        """Component at t+1 containing the component ``rep`` at t."""
        return self.comp[sigma][t + 1][rep]

    def face(self, tau, sigma, t, rep):
        """Image-component closure: the component of D(tau) containing the image of rep."""
        img = self.diagram.face_map(tau, sigma).get(rep, {})
        if len(img) != 1:
            raise DiagramError(f"face map {tau}<{sigma} does not send vertex {rep} to a vertex")
        v = next(iter(img))
        return self.comp[tau][t][v]

    def is_point_diagram(self):
        return all(len(self.components(s, t)) <= 1 for s in self.index for t in range(len(self.grid)))


def pi0_diagram(D):
    return Pi0Diagram(D)


class Multinerve:
    """Realization of a pi_0 diagram: cells (sigma, component) of dimension dim sigma.

    Merge maps across grid indices make it regularly filtered, so homology is
    computed from its chain family by the module method.
    """

    def __init__(self, pi0):
        self.pi0 = pi0
        p = pi0.field
        basis, degree, filt, Ds, steps = [], [], [], [], []
        T = len(pi0.grid)
        for t in range(T):
            keys = [(s, r) for s in pi0.index for r in pi0.components(s, t)]
            pos = {k: i for i, k in enumerate(keys)}
            M = np.zeros((len(keys), len(keys)), dtype=np.int64)
            for j, (s, r) in enumerate(keys):
                for i, tau in enumerate(faces_of(s)):
                    img = pi0.face(tau, s, t, r)
                    M[pos[(tau, img)], j] = (M[pos[(tau, img)], j] + (1 if i % 2 == 0 else -1)) % p
            basis.append(keys)
            degree.append([len(s) - 1 for s, _ in keys])
            filt.append([len(s) - 1 for s, _ in keys])
            Ds.append(M)
        for t in range(T - 1):
            nxt = {k: i for i, k in enumerate(basis[t + 1])}
            S = np.zeros((len(basis[t + 1]), len(basis[t])), dtype=np.int64)
            for j, (s, r) in enumerate(basis[t]):
                S[nxt[(s, pi0.merge(s, t, r))], j] = 1
            steps.append(S)
        self.family = ChainFamily(pi0.grid, p, basis, degree, filt, Ds, steps)

    def cells_at(self, t):
        return self.family.basis[t]

    def homology_module(self, k):
        return self.family.homology_module(k)

    def barcode(self, k):
        return self.homology_module(k).barcode(k)


def multinerve(D):
    return Multinerve(pi0_diagram(D))


# join diagrams
def join_diagram(K, partition):
    """The (K, P)-join diagram over the simplex on the blocks of P.

    Fiber over sigma: product cells prod_{U in sigma} tau_U with tau_U a
    nonempty simplex in block U and the union of the tau_U a simplex of K.
    Face maps drop a factor when it is a vertex and vanish otherwise.
    """
    verts = sorted(c.label[0] for c in K.cells if c.dim == 0)
    blocks = [tuple(sorted(b)) for b in partition]
    flat = sorted(v for b in blocks for v in b)
    if flat != verts or len(set(flat)) != len(flat):
        raise DiagramError("P is not a partition of the vertex set")
    if any(c.birth != 0 for c in K.cells if c.dim == 0):
        raise DiagramError("vertex set varies along the grid")
    block_of = {v: i for i, b in enumerate(blocks) for v in b}
    simplex_birth = {tuple(c.label): c.birth for c in K.cells}
    p = K.field
    m = len(blocks)
    index = [s for r in range(1, m + 1) for s in combinations(range(m), r)]
    # restrictions rho(U) for each simplex rho of K
    support = {}
    for lab in simplex_birth:
        s = tuple(sorted({block_of[v] for v in lab}))
        support.setdefault(s, []).append(lab)

    def factor_faces(tau):
        if len(tau) == 1:
            return []
        return [(tau[:i] + tau[i + 1:], 1 if i % 2 == 0 else -1) for i in range(len(tau))]

    fibers, pos = {}, {}
    for s in index:
        items = set()
        for lab in support.get(s, []):
            parts = tuple(tuple(v for v in lab if block_of[v] == U) for U in s)
            # every product of nonempty faces of the parts is a cell
            choices = [[f for r in range(1, len(pt) + 1) for f in combinations(pt, r)] for pt in parts]
            for cell in product(*choices):
                items.add(cell)
        cells_sorted = sorted(items, key=lambda c: (sum(len(x) - 1 for x in c), simplex_birth[tuple(sorted(v for x in c for v in x))], c))
        ids = {c: i for i, c in enumerate(cells_sorted)}
        cells = []
        for i, c in enumerate(cells_sorted):
            bd = {}
            shift = 0
            for j, x in enumerate(c):
                for f, sg in factor_faces(x):
                    face = c[:j] + (f,) + c[j + 1:]
                    sgn = sg * (-1 if shift % 2 else 1)
                    bd[ids[face]] = (bd.get(ids[face], 0) + sgn) % p
                shift += len(x) - 1
            dim = sum(len(x) - 1 for x in c)
            birth = simplex_birth[tuple(sorted(v for x in c for v in x))]
            cells.append(Cell(i, dim, birth, tuple(sorted((f, v) for f, v in bd.items() if v)), c))
        fibers[s] = FilteredComplex(cells, K.grid, p)
        pos[s] = ids

    def projection(t, s):
        keep = [s.index(U) for U in t]
        out = {}
        for c in fibers[s].cells:
            dropped = [x for j, x in enumerate(c.label) if j not in keep]
            if all(len(x) == 1 for x in dropped):
                out[c.id] = {pos[t][tuple(c.label[j] for j in keep)]: 1}
            else:
                out[c.id] = {}
        return out

    D = Diagram(index, fibers, projection, K.grid, p, "join")
    D.blocks = blocks
    return D
