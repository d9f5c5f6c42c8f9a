"""Acyclic and eps-acyclic carriers: certification, synthesis of carried chain
maps and homotopies, composition, and the point-cloud and lattice examples."""
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import linalg
from .complex import TOL, FiltrationGrid, build_vietoris_rips, pairwise_distances
from .persistence import HomologyBasis, bottleneck, compute_ph


class CarrierError(ValueError):
    pass


class Carrier:
    """Assignment of target subcomplexes to source cells, evaluated at t + shift.

    ``assign`` is either a dict cell -> iterable of target cells (closed under
    faces on use) or a callable (cell, t) -> iterable. Source and target share
    one grid; the value at source index t only keeps target cells born by the
    snapped index grid.shift(t, shift).
    """

    def __init__(self, source, target, assign, shift=0.0, name=None, constant=None):
        if source.grid != target.grid:
            raise CarrierError("source and target must share a grid")
        if source.field != target.field:
            raise CarrierError("source and target must share a field")
        self.source, self.target = source, target
        self.grid = source.grid
        self.shift = float(shift)
        self.name = name
        self._static = None
        self._fn = None
        if callable(assign):
            self._fn = assign
        else:
            self._static = {c: target.closure(v) for c, v in assign.items()}
        self._cache = {}
        self._const = {}
        self._const_fn = constant

    def target_index(self, t):
        return self.grid.shift(t, self.shift)

    def constant(self, c):
        """True when F_t(c) is the same set for every t >= birth(c)."""
        if c not in self._const:
            if self._static is not None:
                tt = self.target_index(self.source.cells[c].birth)
                births = self.target.cells
                self._const[c] = all(births[d].birth <= tt for d in self._static.get(c, ()))
            else:
                self._const[c] = bool(self._const_fn and self._const_fn(c))
        return self._const[c]

    def at(self, c, t):
        """F_t(c) as a frozenset of target cell ids."""
        b = self.source.cells[c].birth
        if t > b and self.constant(c):
            t = b
        key = (c, t)
        if key not in self._cache:
            tt = self.target_index(t)
            if self._static is not None:
                base = self._static.get(c, frozenset())
            else:
                base = self.target.closure(self._fn(c, t))
            self._cache[key] = frozenset(d for d in base if self.target.cells[d].birth <= tt)
        return self._cache[key]

    def values(self, c):
        """Distinct (t, F_t(c)) for t >= birth(c)."""
        b = self.source.cells[c].birth
        if self.constant(c):
            return [(b, self.at(c, b))]
        out, seen = [], set()
        for t in range(b, len(self.grid)):
            s = self.at(c, t)
            if s not in seen:
                seen.add(s)
                out.append((t, s))
        return out

    def to_json(self):
        out = {"shift": self.shift, "assign": []}
        for t in range(len(self.grid)):
            m = {str(c.id): sorted(self.at(c.id, t)) for c in self.source.cells if c.birth <= t}
            out["assign"].append(m)
        return out


def reduced_homology(K, members, max_degree=None):
    """Reduced Betti numbers of the subcomplex ``members`` (all cells counted, no births)."""
    members = sorted(members)
    if not members:
        return None
    p = K.field
    by = {}
    for c in members:
        by.setdefault(K.cells[c].dim, []).append(c)
    top = max(by)
    if max_degree is None:
        max_degree = top
    ranks = {}
    for d in range(1, top + 1):
        rows = by.get(d - 1, [])
        cols = by.get(d, [])
        if not rows or not cols:
            ranks[d] = 0
            continue
        pos = {c: i for i, c in enumerate(rows)}
        M = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for j, c in enumerate(cols):
            for f, k in K.cells[c].boundary:
                M[pos[f], j] = k % p
        ranks[d] = linalg.rank(M, p)
    betti = []
    for d in range(0, max_degree + 1):
        b = len(by.get(d, [])) - ranks.get(d, 0) - ranks.get(d + 1, 0)
        betti.append(b - 1 if d == 0 else b)
    return betti


@dataclass
class AcyclicityReport:
    ok: bool
    checked: int = 0
    failure: dict = None

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "checked": self.checked, "failure": self.failure}


def _needed_degree(F, c, mode):
    if mode == "full":
        return None
    top = F.target.max_dim
    return min(F.source.cells[c].dim + (1 if mode == "homotopy" else 0), max(top - 1, 0))


def check_acyclic(F, mode="full"):
    """Reduced homology of every F_t(c) vanishes.

    mode 'full' checks every degree; 'map' checks degrees <= dim c (enough for
    a carried chain map) and 'homotopy' degrees <= dim c + 1, both capped below
    the top dimension of the target (a truncated skeleton).
    """
    seen = {}
    n = 0
    for c in F.source.cells:
        for t, S in F.values(c.id):
            deg = _needed_degree(F, c.id, mode)
            key = (S, deg)
            if key not in seen:
                seen[key] = reduced_homology(F.target, S, deg)
            b = seen[key]
            n += 1
            if b is None:
                return AcyclicityReport(False, n, {"cell": c.id, "t": t, "degree": None, "reason": "empty"})
            for d, x in enumerate(b):
                if x:
                    return AcyclicityReport(False, n, {"cell": c.id, "t": t, "degree": d,
                                                       "reason": f"reduced H_{d} has rank {x}"})
    return AcyclicityReport(True, n)


def check_semicontinuous(F):
    """tau a face of sigma => F_t(tau) subset of F_t(sigma); F_a(c) subset of F_b(c) for a <= b."""
    below = F.source.face_order()
    fails = []
    for c in F.source.cells:
        prev = None
        last = c.birth + 1 if F.constant(c.id) and all(F.constant(f) for f in below[c.id]) else len(F.grid)
        for t in range(c.birth, last):
            S = F.at(c.id, t)
            for f in below[c.id]:
                if not F.at(f, t) <= S:
                    fails.append(("face", f, c.id, t))
            if prev is not None and not prev <= S:
                fails.append(("time", c.id, t))
            prev = S
        if len(fails) > 5:
            break
    return fails


def compose(F, G):
    """G o F: c -> closure of the union of G(d) over d in F(c); shifts add.
    Acyclicity is not asserted."""
    if F.target is not G.source and len(F.target.cells) != len(G.source.cells):
        raise CarrierError("carriers do not compose")

    def assign(c, t):
        tf = F.target_index(t)
        out = set()
        for d in F.at(c, t):
            out |= G.at(d, tf)
        return out

    def constant(c):
        return F.constant(c) and all(G.constant(d) for d in F.at(c, F.source.cells[c].birth))

    return Carrier(F.source, G.target, assign, F.shift + G.shift, name="compose", constant=constant)


def contained(F, G):
    """Cellwise F_t(c) subset of G_t(c) at the common target index. Returns failures."""
    fails = []
    for c in F.source.cells:
        last = c.birth + 1 if F.constant(c.id) and G.constant(c.id) else len(F.grid)
        for t in range(c.birth, last):
            if not F.at(c.id, t) <= G.at(c.id, t):
                fails.append({"cell": c.id, "t": t})
                break
        if fails:
            break
    return fails


def closure_carrier(X, shift=0.0):
    """Identity carrier c -> closure(c), optionally shifted."""
    return Carrier(X, X, {c.id: [c.id] for c in X.cells}, shift, "closure")


class ChainMapFamily:
    """A chain map between fully filtered complexes: one global matrix
    (target cells x source cells) whose restriction to cells born by t lands
    in cells born by targets[t]."""

    def __init__(self, source, target, M, shift=0.0):
        self.source, self.target = source, target
        self.matrix = M % source.field
        self.shift = float(shift)
        self.targets = [source.grid.shift(t, shift) for t in range(len(source.grid))]

    def at(self, t):
        a = [c.id for c in self.source.cells if c.birth <= t]
        b = [c.id for c in self.target.cells if c.birth <= self.targets[t]]
        return self.matrix[np.ix_(b, a)]

    def chain_map_failures(self):
        X, Y, p = self.source, self.target, self.source.field
        DX, DY = _full_boundary(X), _full_boundary(Y)
        out = []
        if not np.array_equal(linalg.matmul(DY, self.matrix, p), linalg.matmul(self.matrix, DX, p)):
            out.append("boundary does not commute")
        for c in X.cells:
            rows = np.nonzero(self.matrix[:, c.id])[0]
            if any(Y.cells[r].birth > self.targets[c.birth] for r in rows):
                out.append(f"cell {c.id} maps to cells born after its shifted birth")
                break
            if any(Y.cells[r].dim != c.dim for r in rows):
                out.append(f"cell {c.id} changes degree")
                break
        return out

    def carried_failures(self, F):
        out = []
        for c in self.source.cells:
            supp = set(np.nonzero(self.matrix[:, c.id])[0].tolist())
            for t in range(c.birth, len(self.source.grid)):
                if not supp <= F.at(c.id, t):
                    out.append({"cell": c.id, "t": t})
                    break
        return out

    def induced(self, k):
        """Induced maps H_k(X_t) -> H_k(Y_{targets[t]}) in the standard bases."""
        X, Y, p = self.source, self.target, self.source.field
        rows, cols = Y.by_dim(k), X.by_dim(k)
        M = self.matrix[np.ix_(rows, cols)] if len(rows) and len(cols) else np.zeros((len(rows), len(cols)), dtype=np.int64)
        out = []
        for t in range(len(X.grid)):
            hx = HomologyBasis(X, k, t)
            hy = HomologyBasis(Y, k, self.targets[t])
            out.append(hy.coords(linalg.matmul(M, hx.reps, p)) if hx.dim else np.zeros((hy.dim, 0), dtype=np.int64))
        return out

    def rank_function(self, k):
        """rk[s, t] = rank of H_k(X_s) -> H_k(Y_t') for t' >= targets[s]."""
        from .persistence import homology_module
        p = self.source.field
        ind = self.induced(k)
        HY = homology_module(self.target, k)
        n = len(self.source.grid)
        rk = np.zeros((n, n), dtype=np.int64)
        for s in range(n):
            for t in range(n):
                if t < self.targets[s]:
                    continue
                M = linalg.matmul(HY.map(self.targets[s], t), ind[s], p)
                rk[s, t] = linalg.rank(M, p) if M.size else 0
        return rk


def _full_boundary(K):
    n = len(K.cells)
    D = np.zeros((n, n), dtype=np.int64)
    for c in K.cells:
        for f, k in c.boundary:
            D[f, c.id] = k % K.field
    return D


def _solve_in(Y, S, z, dim, rng=None):
    """Find h supported on dim-cells of S with boundary z (vector over all cells)."""
    p = Y.field
    cols = sorted(c for c in S if Y.cells[c].dim == dim)
    rows = np.nonzero(z)[0].tolist()
    rows = sorted(set(rows) | {f for c in cols for f, _ in Y.cells[c].boundary})
    if not cols:
        return None if np.any(z) else np.zeros(len(Y.cells), dtype=np.int64)
    pos = {r: i for i, r in enumerate(rows)}
    A = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for j, c in enumerate(cols):
        for f, k in Y.cells[c].boundary:
            A[pos[f], j] = k % p
    b = np.array([z[r] for r in rows], dtype=np.int64) % p
    x = linalg.solve(A, b, p)
    if x is None:
        return None
    if rng is not None:
        N = linalg.nullspace(A, p)
        if N.shape[1]:
            x = (x + N @ rng.integers(0, p, N.shape[1])) % p
    h = np.zeros(len(Y.cells), dtype=np.int64)
    h[cols] = x
    return h


def synthesize_chain_map(F, vertex_choice="first", seed=None):
    """Chain map carried by F, built in (birth, dim) order by exact solves.

    vertex_choice: 'first' | 'last' | 'random' picks the image of each vertex
    inside its carrier; with a seed, solutions are also perturbed by random
    cycles so that different seeds give different (homotopic) maps.
    """
    X, Y = F.source, F.target
    p = X.field
    rng = np.random.default_rng(seed) if seed is not None else None
    M = np.zeros((len(Y.cells), len(X.cells)), dtype=np.int64)
    order = sorted(X.cells, key=lambda c: (c.birth, c.dim, c.id))
    for c in order:
        S = F.at(c.id, c.birth)
        if not S:
            raise CarrierError(f"carrier is empty at cell {c.id}")
        if c.dim == 0:
            verts = sorted(d for d in S if Y.cells[d].dim == 0)
            if not verts:
                raise CarrierError(f"carrier of vertex {c.id} has no vertex")
            if vertex_choice == "last":
                v = verts[-1]
            elif vertex_choice == "random":
                v = verts[int((rng or np.random.default_rng(0)).integers(len(verts)))]
            else:
                v = verts[0]
            M[v, c.id] = 1
            continue
        z = np.zeros(len(Y.cells), dtype=np.int64)
        for f, k in c.boundary:
            z = (z + k * M[:, f]) % p
        h = _solve_in(Y, S, z, c.dim, rng)
        if h is None:
            raise CarrierError(f"no carried image for cell {c.id}: carrier not acyclic in degree {c.dim - 1}")
        M[:, c.id] = h
    return ChainMapFamily(X, Y, M, F.shift)


@dataclass
class Homotopy:
    matrix: np.ndarray
    f: ChainMapFamily
    g: ChainMapFamily

    def failures(self):
        X, Y, p = self.f.source, self.f.target, self.f.source.field
        DX, DY = _full_boundary(X), _full_boundary(Y)
        lhs = (linalg.matmul(DY, self.matrix, p) + linalg.matmul(self.matrix, DX, p)) % p
        rhs = (self.g.matrix - self.f.matrix) % p
        return [] if np.array_equal(lhs, rhs) else ["dh + hd != g - f"]


def synthesize_homotopy(F, f, g):
    """h with dh + hd = g - f, carried by F, built in (birth, dim) order."""
    X, Y = F.source, F.target
    p = X.field
    H = np.zeros((len(Y.cells), len(X.cells)), dtype=np.int64)
    order = sorted(X.cells, key=lambda c: (c.birth, c.dim, c.id))
    for c in order:
        z = (g.matrix[:, c.id] - f.matrix[:, c.id]) % p
        for e, k in c.boundary:
            z = (z - k * H[:, e]) % p
        h = _solve_in(Y, F.at(c.id, c.birth), z, c.dim + 1)
        if h is None:
            raise CarrierError(f"no carried homotopy at cell {c.id}: carrier not acyclic in degree {c.dim}")
        H[:, c.id] = h
    return Homotopy(H, f, g)


# equivalence packs
@dataclass
class EquivalencePack:
    F: Carrier
    G: Carrier
    IX: Carrier
    IY: Carrier
    eps: float
    meta: dict = field(default_factory=dict)


@dataclass
class EquivalenceCertificate:
    ok: bool
    eps: float
    checks: dict
    bottleneck: dict
    failures: list

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "eps": self.eps, "checks": self.checks,
                "bottleneck": {str(k): v for k, v in self.bottleneck.items()}, "failures": self.failures}


def verify_equivalence(pack, max_k=1, mode="map"):
    """Acyclicity of all four carriers, G o F in I_X and F o G in I_Y, carried
    chain maps both ways, and bottleneck(PH_k(X), PH_k(Y)) <= eps."""
    checks, failures = {}, []
    for name in ("F", "G", "IX", "IY"):
        rep = check_acyclic(getattr(pack, name), mode)
        checks[f"{name} acyclic"] = rep.ok
        if not rep.ok:
            failures.append({"check": f"{name} acyclic", **rep.failure})
    for name, A, B in (("G o F in I_X", compose(pack.F, pack.G), pack.IX),
                       ("F o G in I_Y", compose(pack.G, pack.F), pack.IY)):
        bad = contained(A, B)
        checks[name] = not bad
        if bad:
            failures.append({"check": name, **bad[0]})
    bn = {}
    if not failures:
        for name, C in (("f", pack.F), ("g", pack.G)):
            try:
                m = synthesize_chain_map(C)
                fl = m.chain_map_failures() + [str(x) for x in m.carried_failures(C)]
            except CarrierError as exc:
                fl = [str(exc)]
            checks[f"{name} chain map"] = not fl
            if fl:
                failures.append({"check": f"{name} chain map", "reason": fl[0]})
        X, Y = pack.F.source, pack.F.target
        bx, by = compute_ph(X, max_k), compute_ph(Y, max_k)
        for k in range(max_k + 1):
            d = bottleneck(bx[k], by[k])
            bn[k] = d
            if d > pack.eps + TOL:
                failures.append({"check": "bottleneck", "k": k, "distance": d, "eps": pack.eps})
    return EquivalenceCertificate(not failures, pack.eps, checks, bn, failures)


def hausdorff(X, Y):
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    D = np.sqrt(((X[:, None, :] - Y[None, :, :]) ** 2).sum(-1))
    return float(max(D.min(1).max(), D.min(0).max()))


def _vr_pair(X, Y, max_dim, field):
    vals = {0.0}
    for P in (X, Y):
        D = pairwise_distances(P)
        vals |= {round(float(v), 12) for v in D[np.triu_indices(len(P), 1)]}
    grid = FiltrationGrid(sorted(vals))
    return (build_vietoris_rips(X, max_dim, grid, field), build_vietoris_rips(Y, max_dim, grid, field))


def _ball_simplex(K, verts):
    """All simplices of K on the vertex set ``verts`` (the full simplex up to K's dimension)."""
    verts = set(verts)
    return [c.id for c in K.cells if set(c.label) <= verts]


def vr_carrier(X, Y, max_dim=2, field=2):
    """Carriers between Vietoris-Rips complexes of two clouds with eps = 2 d_H."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    dH = hausdorff(X, Y)
    eps = 2 * dH
    KX, KY = _vr_pair(X, Y, max_dim, field)
    DXY = np.sqrt(((X[:, None, :] - Y[None, :, :]) ** 2).sum(-1))
    DXX = pairwise_distances(X)
    DYY = pairwise_distances(Y)
    r = eps / 2 + TOL

    def near(D, verts, rad):
        return {j for j in range(D.shape[1]) if any(D[v, j] <= rad for v in verts)}

    F = Carrier(KX, KY, {c.id: _ball_simplex(KY, near(DXY, c.label, r)) for c in KX.cells}, eps, "F")
    G = Carrier(KY, KX, {c.id: _ball_simplex(KX, near(DXY.T, c.label, r)) for c in KY.cells}, eps, "G")
    IX = Carrier(KX, KX, {c.id: _ball_simplex(KX, near(DXX, c.label, eps + TOL)) for c in KX.cells}, 2 * eps, "IX")
    IY = Carrier(KY, KY, {c.id: _ball_simplex(KY, near(DYY, c.label, eps + TOL)) for c in KY.cells}, 2 * eps, "IY")
    return EquivalencePack(F, G, IX, IY, eps, {"hausdorff": dH})


# lattice carriers
def _axis_breaks(W, r=1.0, l=0.0):
    pts = {0.0, float(W)}
    k = int(np.floor(-l / r)) - 1
    while True:
        x = r * k + l
        if x >= W - TOL:
            break
        if x > TOL:
            pts.add(round(x, 12))
        k += 1
    return sorted(pts)


def _rect_cells(breaks, f):
    """All cells of the rectilinear grid on per-axis breakpoints, labelled by
    index intervals; value = max f over the cell's corners."""
    from .complex import _all_faces_cube
    tops = [tuple((i, i + 1) for i in idx) for idx in product(*[range(len(b) - 1) for b in breaks])]
    vals = {}
    for top in tops:
        for cube in _all_faces_cube(top):
            if cube not in vals:
                corners = product(*[sorted({breaks[a][i], breaks[a][j]}) for a, (i, j) in enumerate(cube)])
                vals[cube] = max(round(float(f(np.array(v))), 12) for v in corners)
    return vals


def _assemble_rect(vals, grid, field):
    from .complex import _assemble, cube_dim, cube_faces
    items = {cube: (cube_dim(cube), grid.index(v), cube_faces(cube)) for cube, v in vals.items()}
    return _assemble(items, grid, field, True)


def lattice_pair(f, r, l, W=2.0, field=2):
    """Cubical complexes of f on Z^N and on rZ^N + l, both clipped to [0, W]^N
    (axis breakpoints are {0, W} plus the lattice points strictly inside)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    l = np.atleast_1d(np.asarray(l, dtype=float))
    if len(l) == 1 and len(r) > 1:
        l = np.repeat(l, len(r))
    bx = [_axis_breaks(W) for _ in range(len(r))]
    by = [_axis_breaks(W, r[a], l[a]) for a in range(len(r))]
    vx, vy = _rect_cells(bx, f), _rect_cells(by, f)
    grid = FiltrationGrid(sorted(set(vx.values()) | set(vy.values())))
    return _assemble_rect(vx, grid, field), _assemble_rect(vy, grid, field), bx, by


def _geom_box(cube, breaks):
    return [(breaks[a][i], breaks[a][j]) for a, (i, j) in enumerate(cube)]


def _open_meet(a, b):
    """Relative interiors of two boxes intersect."""
    for (lo1, hi1), (lo2, hi2) in zip(a, b):
        p1, p2 = hi1 - lo1 <= TOL, hi2 - lo2 <= TOL
        if p1 and p2:
            if abs(lo1 - lo2) > TOL:
                return False
        elif p1:
            if not lo2 + TOL < lo1 < hi2 - TOL:
                return False
        elif p2:
            if not lo1 + TOL < lo2 < hi1 - TOL:
                return False
        elif not (lo1 < hi2 - TOL and lo2 < hi1 - TOL):
            return False
    return True


def lattice_carrier(f, r, l, W=2.0, field=2):
    """Carriers between the cubical complexes of f on Z^N and on rZ^N + l, clipped
    to the window [0, W]^N. A cell goes to the closure of the target cells whose
    interiors meet its interior; eps is the largest birth increase this needs."""
    KX, KY, bx, by = lattice_pair(f, r, l, W, field)
    gx = [_geom_box(c.label, bx) for c in KX.cells]
    gy = [_geom_box(c.label, by) for c in KY.cells]

    def meet(A, gA, gB):
        return {a: [b for b in range(len(gB)) if _open_meet(gA[a], gB[b])] for a in range(len(gA))}

    mxy = meet(KX, gx, gy)
    myx = meet(KY, gy, gx)
    g = KX.grid
    eps = 0.0
    for A, B, m in ((KX, KY, mxy), (KY, KX, myx)):
        for a, bs in m.items():
            top = max(g[B.cells[b].birth] for b in B.closure(bs))
            eps = max(eps, top - g[A.cells[a].birth])
    eps = round(eps, 12)
    F = Carrier(KX, KY, mxy, eps, "F")
    G = Carrier(KY, KX, myx, eps, "G")
    IX = compose(F, G)
    IY = compose(G, F)
    IX.name, IY.name = "IX", "IY"
    return EquivalencePack(F, G, IX, IY, eps, {"window": W, "breaks_x": bx, "breaks_y": by})


def identity_pack(X):
    F = closure_carrier(X)
    return EquivalencePack(F, closure_carrier(X), closure_carrier(X), closure_carrier(X), 0.0)


def cone(K, field=None):
    """Simplicial cone over K with a new apex vertex (label max + 1), born at the grid minimum."""
    from .complex import build_simplicial
    verts = [c.label[0] for c in K.cells if c.dim == 0]
    apex = max(verts) + 1
    spec = []
    for c in K.cells:
        spec.append((list(c.label), K.grid[c.birth]))
        spec.append((list(c.label) + [apex], K.grid[c.birth]))
    spec.append(([apex], K.grid[0]))
    return build_simplicial(spec, field or K.field, K.grid), apex
