"""Comparison of the spectral sequences of two covers: refinement morphisms,
the two-cover complex of homology modules, theta, approximate inverses,
interpolating local checks and the cover stability bound."""
import numpy as np

from . import linalg
from .chains import ChainFamily
from .complex import TOL
from .covers import Cover, CoverError, common_refinement, find_refinement, interpolation, nerve_extent, whole
from .diagrams import cover_diagram, faces_of
from .persistence import (INF, ModuleMorphism, PersistenceModule, HomologyBasis, bottleneck,
                          compose_left_right)
from .spectral import PageMorphism, SpectralSequence, check_page_interleaving, compute_pages, double_complex


class HypothesisError(ValueError):
    """A theorem hypothesis does not hold for the given input."""


def max_bar(bc):
    """Largest bar length (inf for an infinite bar, 0 for the empty barcode)."""
    out = 0.0
    for b, d in bc.bars:
        out = max(out, INF if d is None else d - b)
    return out


class CoverSS:
    """The diagram, double complex and spectral sequence of a cover."""

    def __init__(self, X, U):
        self.X, self.cover = X, U
        self.diagram = cover_diagram(X, U)
        self.dc = double_complex(self.diagram)
        self.ss = compute_pages(self.dc)

    def parent_chain(self, sigma, fiber_vec):
        """Fiber chain of the piece sigma -> {parent cell: coeff}."""
        old = self.diagram.old_of[sigma]
        return {old[c]: v for c, v in fiber_vec.items()}


def cover_ss(X, U):
    return CoverSS(X, U)


# refinement morphisms
def refinement_chain_map(rho, A, B):
    """Chain map of double complexes C(V) -> C(U) for rho: V -> U (full matrices)."""
    p = A.dc.field
    M = np.zeros((len(B.dc.keys), len(A.dc.keys)), dtype=np.int64)
    newB = {s: {old: i for i, old in enumerate(B.diagram.old_of[s])} for s in B.diagram.index}
    for j, (s, c) in enumerate(A.dc.keys):
        img = rho.image(s)
        if img is None:
            continue
        s2, sign = img
        cell = A.diagram.old_of[s][c]
        i = B.dc.position[(s2, newB[s2][cell])]
        M[i, j] = sign % p
    for name, dA, dB in (("dV", A.dc.dV, B.dc.dV), ("dH", A.dc.dH, B.dc.dH)):
        if not np.array_equal(linalg.matmul(M, dA, p), linalg.matmul(dB, M, p)):
            raise ValueError(f"refinement map does not commute with {name}")
    return M


def refinement_ss_morphism(rho, X=None, U=None, V=None, A=None, B=None):
    """PageMorphism E(X, V) -> E(X, U) induced by a refinement map rho: V -> U."""
    A = A or CoverSS(X, V)
    B = B or CoverSS(X, U)
    M = refinement_chain_map(rho, A, B)
    fa, fb = A.ss.family, B.ss.family
    maps = [M[np.ix_(fb.alive[t], fa.alive[t])] for t in range(len(X.grid if X is not None else A.X.grid))]
    f = PageMorphism(A.ss, B.ss, 0.0, 0, chain_maps=maps)
    f.chain_matrix = M
    f.rho = rho
    return f


def page_matrices(f, r=2):
    """{(p, q, t): matrix} for all bidegrees of the source and target."""
    out = {}
    bideg = sorted(set(f.source.bidegrees()) | set(f.target.bidegrees()))
    for p, q in bideg:
        for t in range(len(f.source.grid)):
            out[(p, q, t)] = f.get(r, p, q, t)
    return out


def same_page_matrices(f, g, r=2):
    a, b = page_matrices(f, r), page_matrices(g, r)
    return all(np.array_equal(a[k], b[k]) for k in a)


def zero_or_iso(M, p):
    """'0', 'Id' (invertible, square) or 'other'; empty matrices count as '0'."""
    if not M.any():
        return "0"
    if M.shape[0] == M.shape[1] and linalg.rank(M, p) == M.shape[0]:
        return "Id"
    return "other"


def mutual_refinement_iso(X, U, V):
    """Page-2 isomorphism certificate for covers refining one another."""
    A, B = CoverSS(X, V), CoverSS(X, U)
    f = refinement_ss_morphism(find_refinement(V, U), X, U, V, A, B)
    g = refinement_ss_morphism(find_refinement(U, V), X, V, U, B, A)
    p = X.field
    fails = []
    for src, first, second in ((A, f, g), (B, g, f)):
        for (pp, q) in src.ss.bidegrees():
            for t in range(len(X.grid)):
                M = linalg.matmul(second.get(2, pp, q, t), first.get(2, pp, q, t), p)
                if not np.array_equal(M, np.eye(M.shape[0], dtype=np.int64)):
                    fails.append((pp, q, t))
    bars = {}
    for (pp, q) in sorted(set(A.ss.bidegrees()) | set(B.ss.bidegrees())):
        ba, bb = A.ss.barcode(2, pp, q), B.ss.barcode(2, pp, q)
        if ba != bb:
            fails.append(("barcode", pp, q))
        if len(ba):
            bars[(pp, q)] = ba
    return {"ok": not fails, "failures": fails, "barcodes": bars}


# the two-cover complex
class CoverPairComplex:
    """Entries PH_k(V_sigma & U_tau) for sigma in N_V (degree p) and tau in N_U
    (degree q), with D = delta^V + (-1)^p delta^U on homology bases."""

    def __init__(self, X, V, U, k):
        self.X, self.V, self.U, self.k = X, V, U, k
        self.grid, self.field = X.grid, X.field
        p = X.field
        T = len(X.grid)
        self.pairs = []
        self.hb = {}
        for s in V.nerve_simplices():
            for u in U.nerve_simplices():
                W = V.piece(s) & U.piece(u)
                if W:
                    self.pairs.append((s, u))
                    self.hb[(s, u)] = [HomologyBasis(X, k, t, W) for t in range(T)]
        self.pairs.sort(key=lambda su: (len(su[0]) + len(su[1]), su))
        basis, degree, fp, fq, Ds, steps = [], [], [], [], [], []
        for t in range(T):
            keys = [(s, u, j) for s, u in self.pairs for j in range(self.hb[(s, u)][t].dim)]
            pos = {}
            for i, (s, u, j) in enumerate(keys):
                pos.setdefault((s, u), i)
            M = np.zeros((len(keys), len(keys)), dtype=np.int64)
            for (s, u) in self.pairs:
                h = self.hb[(s, u)][t]
                if h.dim == 0:
                    continue
                j0 = pos[(s, u)]
                ps = len(s) - 1
                terms = [(s2, u, 1 if i % 2 == 0 else -1) for i, s2 in enumerate(faces_of(s))]
                terms += [(s, u2, (1 if i % 2 == 0 else -1) * (1 if ps % 2 == 0 else -1))
                          for i, u2 in enumerate(faces_of(u))]
                for s2, u2, sg in terms:
                    h2 = self.hb[(s2, u2)][t]
                    if h2.dim == 0:
                        continue
                    C = h2.coords(h.reps)
                    i0 = pos[(s2, u2)]
                    M[i0:i0 + h2.dim, j0:j0 + h.dim] = (M[i0:i0 + h2.dim, j0:j0 + h.dim] + sg * C) % p
            basis.append(keys)
            degree.append([len(s) + len(u) - 2 for s, u, _ in keys])
            fp.append([len(s) - 1 for s, u, _ in keys])
            fq.append([len(u) - 1 for s, u, _ in keys])
            Ds.append(M)
        for t in range(T - 1):
            S = np.zeros((len(basis[t + 1]), len(basis[t])), dtype=np.int64)
            pos1 = {}
            for i, (s, u, j) in enumerate(basis[t + 1]):
                pos1.setdefault((s, u), i)
            pos0 = {}
            for i, (s, u, j) in enumerate(basis[t]):
                pos0.setdefault((s, u), i)
            for (s, u) in self.pairs:
                h0, h1 = self.hb[(s, u)][t], self.hb[(s, u)][t + 1]
                if h0.dim and h1.dim:
                    S[pos1[(s, u)]:pos1[(s, u)] + h1.dim, pos0[(s, u)]:pos0[(s, u)] + h0.dim] = h1.coords(h0.reps)
            steps.append(S)
        self.basis, self.degree, self.D, self.steps = basis, degree, Ds, steps
        self._fp, self._fq = fp, fq
        self._fam = {}

    def family(self, which="I"):
        if which not in self._fam:
            filt = self._fp if which == "I" else self._fq
            self._fam[which] = ChainFamily(self.grid, self.field, self.basis, self.degree, filt, self.D, self.steps)
        return self._fam[which]

    def identities(self):
        """delta^V and the signed delta^U square to zero and anticommute."""
        p = self.field
        out = {"D o D = 0": True, "filtrations preserved": True}
        for t in range(len(self.grid)):
            D = self.D[t]
            if linalg.matmul(D, D, p).any():
                out["D o D = 0"] = False
            for fl in (self._fp[t], self._fq[t]):
                fl = np.asarray(fl)
                i, j = np.nonzero(D)
                if np.any(fl[i] > fl[j]):
                    out["filtrations preserved"] = False
        return out

    def block_of(self, t, key):
        """Positions of the homology basis of the pair ``key`` at t."""
        return [i for i, (s, u, j) in enumerate(self.basis[t]) if (s, u) == key]

    def total_homology(self, n):
        return self.family("I").homology_module(n)


def build_cover_pair_complex(X, V, U, k):
    return CoverPairComplex(X, V, U, k)


class PairPages:
    """Spectral sequence of a pair complex indexed by (p, q) = (V-degree, U-degree)."""

    def __init__(self, cpc, which):
        self.cpc, self.which = cpc, which
        self.ss = SpectralSequence(cpc.family(which))

    def _pq(self, p, q):
        return (p, q) if self.which == "I" else (q, p)

    def module(self, r, p, q):
        a, b = self._pq(p, q)
        return self.ss.module(r, a, b)

    def barcode(self, r, p, q):
        return self.module(r, p, q).barcode(self.cpc.k)

    def dims(self, r, p, q):
        a, b = self._pq(p, q)
        return self.ss.dims(r, a, b)

    def einf_totals(self, n):
        return self.ss.total_dims(self.ss.stable_page, n)


def pair_pages(cpc, which="I"):
    if which not in ("I", "II"):
        raise ValueError("which must be 'I' or 'II'")
    return PairPages(cpc, which)


def cech_complex(X, V, k):
    """Cech complex of V with PH_k coefficients (the pair complex against {X})."""
    return CoverPairComplex(X, V, whole(X), k)


def cech_homology(X, V, k, n):
    return cech_complex(X, V, k).total_homology(n)


def _projection(cpc, target, t, side):
    """pi^V (side 'V') or pi^U (side 'U') at index t: pair basis -> basis of the
    Cech complex ``target`` of that cover."""
    p = cpc.field
    M = np.zeros((len(target.basis[t]), len(cpc.basis[t])), dtype=np.int64)
    tpos = {}
    for i, (s, u, j) in enumerate(target.basis[t]):
        tpos.setdefault((s, u), i)
    done = set()
    for i, (s, u, j) in enumerate(cpc.basis[t]):
        if (s, u) in done:
            continue
        done.add((s, u))
        if side == "V":
            if len(u) != 1:
                continue
            key = (s, (0,))
        else:
            if len(s) != 1:
                continue
            key = (u, (0,))
        h = cpc.hb[(s, u)][t]
        h2 = target.hb.get(key, [None] * (t + 1))[t]
        if h is None or h2 is None or h.dim == 0 or h2.dim == 0:
            continue
        C = h2.coords(h.reps)
        M[tpos[key]:tpos[key] + h2.dim, i:i + h.dim] = C % p
    return M


class Bridge:
    """E^2_{p,k}(X, V) -> H_p(Cech(V; PH_k)) taking the column-p part of a representative."""

    def __init__(self, css, cech, k):
        self.css, self.cech, self.k = css, cech, k

    def matrix(self, p, t):
        css, cech, k = self.css, self.cech, self.k
        ss = css.ss
        sp = ss.space(2, p, k, t)
        fam = ss.family
        blk = fam.block(t, p + k)
        H = cech.family("I").homology_at(t, p)
        cblk = cech.family("I").block(t, p)
        out = np.zeros((len(cblk), sp.dim), dtype=np.int64)
        cpos = {}
        for i, idx in enumerate(cblk):
            s, u, j = cech.basis[t][idx]
            cpos.setdefault(s, i)
        for col in range(sp.dim):
            vec = sp.reps[:, col]
            per = {}
            for a, v in zip(blk, vec):
                if not v:
                    continue
                s, c = fam.basis[t][a]
                if len(s) - 1 != p:
                    continue
                cell = css.diagram.old_of[s][c]
                per.setdefault(s, {})[cell] = v
            for s, chain in per.items():
                h = cech.hb[(s, (0,))][t]
                g = np.zeros(h.n, dtype=np.int64)
                for cell, v in chain.items():
                    g[h.pos[cell]] = v
                if h.dim:
                    out[cpos[s]:cpos[s] + h.dim, col] = h.coords(g)[:, 0]
        return H.coords(out) if H.dim else np.zeros((0, sp.dim), dtype=np.int64)


class ThetaMorphism:
    """theta^{U,V} on page 2, assembled as pi^U o (pi^V)^{-1} on the pair complex."""

    def __init__(self, X, U, V, A=None, B=None, kmax=None):
        find_refinement(V, U)
        self.X, self.U, self.V = X, U, V
        self.A = A or CoverSS(X, V)
        self.B = B or CoverSS(X, U)
        p = X.field
        T = len(X.grid)
        kmax = X.max_dim if kmax is None else kmax
        self.mats = {}
        for k in range(kmax + 1):
            cpc = CoverPairComplex(X, V, U, k)
            cV, cU = cech_complex(X, V, k), cech_complex(X, U, k)
            bV, bU = Bridge(self.A, cV, k), Bridge(self.B, cU, k)
            tot, famV, famU = cpc.family("I"), cV.family("I"), cU.family("I")
            for n in range(max(self.A.ss.P, self.B.ss.P) + 1):
                for t in range(T):
                    Ht = tot.homology_at(t, n)
                    HV, HU = famV.homology_at(t, n), famU.homology_at(t, n)
                    blk = tot.block(t, n)
                    PV = _projection(cpc, cV, t, "V")[np.ix_(famV.block(t, n), blk)]
                    PU = _projection(cpc, cU, t, "U")[np.ix_(famU.block(t, n), blk)]
                    piV = HV.coords(linalg.matmul(PV, Ht.reps, p)) if HV.dim else np.zeros((0, Ht.dim), dtype=np.int64)
                    piU = HU.coords(linalg.matmul(PU, Ht.reps, p)) if HU.dim else np.zeros((0, Ht.dim), dtype=np.int64)
                    if piV.shape[0] != piV.shape[1] or (piV.size and linalg.rank(piV, p) < piV.shape[0]):
                        raise HypothesisError(f"pi^V is not invertible at degree {n}, k={k}, index {t}")
                    inv = linalg.inverse(piV, p) if piV.size else np.zeros((Ht.dim, 0), dtype=np.int64)
                    th = linalg.matmul(piU, inv, p)
                    eV, eU = bV.matrix(n, t), bU.matrix(n, t)
                    eUi = linalg.inverse(eU, p) if eU.size else np.zeros((eU.shape[1], eU.shape[0]), dtype=np.int64)
                    self.mats[(n, k, t)] = linalg.matmul(eUi, linalg.matmul(th, eV, p), p)

    def page_morphism(self):
        pm = {(2, p, q, t): M for (p, q, t), M in self.mats.items()}
        return PageMorphism(self.A.ss, self.B.ss, 0.0, 2, page_mats=pm)

    def equals_refinement(self):
        rho = refinement_ss_morphism(find_refinement(self.V, self.U), self.X, self.U, self.V, self.A, self.B)
        return all(np.array_equal(M, rho.get(2, p, q, t)) for (p, q, t), M in self.mats.items())


def theta(X, U, V, **kw):
    return ThetaMorphism(X, U, V, **kw)


# module morphisms between page entries
def entry_morphism(f, r, p, q):
    """Page morphism at one entry as a ModuleMorphism (shift 0 required)."""
    mats = [f.get(r, p, q, t) for t in range(len(f.source.grid))]
    return ModuleMorphism(f.source.module(r, p, q), f.target.module(r, p, q), mats, 0.0)


def _kc_bars(m):
    """(max kernel bar, max cokernel bar) of an unshifted module morphism."""
    return max_bar(m.kernel_module().barcode()), max_bar(m.cokernel_module().barcode())


def edge_to_top(ss, n):
    """H_n(Tot) -> E^2 at filtration n (the top filtration of degree n)."""
    fam = ss.family
    H = fam.homology_module(n)
    mats = []
    for t in range(len(ss.grid)):
        sp = ss.space(2, n, 0, t)
        reps = H.subquotients[t].reps
        mats.append(sp.coords(reps) if sp.dim and reps.shape[1] else np.zeros((sp.dim, reps.shape[1]), dtype=np.int64))
    return ModuleMorphism(H, ss.module(2, n, 0), mats)


def edge_from_bottom(ss, q):
    """E^2_{0,q} -> H_q(Tot) sending a class to the homology class of its representative."""
    fam = ss.family
    H = fam.homology_module(q)
    mats = []
    for t in range(len(ss.grid)):
        sp = ss.space(2, 0, q, t)
        h = H.subquotients[t]
        mats.append(h.coords(sp.reps) if sp.dim and h.dim else np.zeros((h.dim, sp.dim), dtype=np.int64))
    return ModuleMorphism(ss.module(2, 0, q), H, mats)


def pi_u_first_page(cpc, q):
    """^II E^1_{0,q} -> sum over tau in N_U^q of PH_k(U_tau), induced by pi^U."""
    pp = PairPages(cpc, "II")
    ss = pp.ss
    target = cech_complex(cpc.X, cpc.U, cpc.k)
    tf = target.family("I")
    dims = [len(tf.block(t, q)) for t in range(len(cpc.grid))]
    tmaps = [tf.step_block(t, q) for t in range(len(cpc.grid) - 1)]
    tmod = PersistenceModule(cpc.grid, dims, tmaps, cpc.field)
    mats = []
    for t in range(len(cpc.grid)):
        sp = ss.space(1, q, 0, t)
        P = _projection(cpc, target, t, "U")[np.ix_(tf.block(t, q), ss.family.block(t, q))]
        mats.append(linalg.matmul(P, sp.reps, cpc.field) if sp.dim else np.zeros((dims[t], 0), dtype=np.int64))
    return ModuleMorphism(ss.module(1, q, 0), tmod, mats)


def measure_eps_nu(X, U, V, kmax=None):
    """Smallest eps, nu for the two right/left interleaving hypotheses, with positions."""
    kmax = X.max_dim if kmax is None else kmax
    eps_at, nu_at = {}, {}
    for k in range(kmax + 1):
        cpc = CoverPairComplex(X, V, U, k)
        ss = SpectralSequence(cpc.family("II"))
        for n in range(cpc.family("II").max_degree + 1):
            a, b = _kc_bars(edge_to_top(ss, n))
            if max(a, b) > TOL:
                eps_at[(n, k)] = max(a, b)
            a, b = _kc_bars(pi_u_first_page(cpc, n))
            if max(a, b) > TOL:
                nu_at[(n, k)] = max(a, b)
    eps = max(eps_at.values(), default=0.0)
    nu = max(nu_at.values(), default=0.0)
    return eps, nu, eps_at, nu_at


def _lr_inverse(f_entry, e, bound, grid):
    """Approximate inverse of an entry morphism (target -> source) shifted by ``bound``."""
    src, tgt = f_entry.source, f_entry.target
    p = src.field
    im = f_entry.image_module()
    ims = [linalg.colspace(M, p) if M.size else np.zeros((M.shape[0], 0), dtype=np.int64) for M in f_entry.mats]
    fm = [linalg.solve(ims[t], f_entry.mats[t], p) if ims[t].shape[1] else np.zeros((0, f_entry.mats[t].shape[1]), dtype=np.int64)
          for t in range(len(grid))]
    f = ModuleMorphism(src, im, fm)
    g = ModuleMorphism(im, tgt, ims)
    cert = compose_left_right(f, g, e)
    if not cert.valid:
        return None, cert
    out = []
    for t in range(len(grid)):
        t2 = grid.shift(grid.shift(t, e), e)
        tb = grid.shift(t, bound)
        if t2 > tb:
            return None, cert
        out.append(linalg.matmul(src.map(t2, tb), cert.psi[t], p))
    return out, cert


def inverse_refinement(X, U, V, eps=None, nu=None):
    """Certify a 2(eps + nu)-interleaving between E(X, U) and E(X, V) for V refining U,
    plus the position-aware 2 max(eps, nu) bound when the contributions sit apart."""
    rho = find_refinement(V, U)
    m_eps, m_nu, eps_at, nu_at = measure_eps_nu(X, U, V)
    if eps is not None and m_eps > eps + TOL:
        k = max(eps_at, key=eps_at.get)
        raise HypothesisError(f"right/left interleaving of the II pages fails for eps={eps} at (n,k)={k}")
    if nu is not None and m_nu > nu + TOL:
        k = max(nu_at, key=nu_at.get)
        raise HypothesisError(f"right/left interleaving with PH(U) fails for nu={nu} at (q,k)={k}")
    eps = m_eps if eps is None else eps
    nu = m_nu if nu is None else nu
    bounds = {"generic": 2 * (eps + nu)}
    eps_pos = {k for k, v in eps_at.items() if v > TOL}
    nu_pos = {k for k, v in nu_at.items() if v > TOL}
    if not (eps_pos & nu_pos):
        bounds["position_aware"] = 2 * max(eps, nu)
    # per-entry kernel/cokernel of theta on the original grid
    A0, B0 = CoverSS(X, V), CoverSS(X, U)
    th0 = refinement_ss_morphism(rho, X, U, V, A0, B0)
    entry_e = {}
    for (p, q) in sorted(set(A0.ss.bidegrees()) | set(B0.ss.bidegrees())):
        entry_e[(p, q)] = max(_kc_bars(entry_morphism(th0, 2, p, q)))
    shifts = [v for v in entry_e.values() if v < INF] + list(bounds.values()) + [eps, nu]
    grid = X.grid.closed_under([s for s in shifts if s > TOL])
    Xg = X.with_grid(grid)
    Ug, Vg = Cover(Xg, U.sets, U.names), Cover(Xg, V.sets, V.names)
    A, B = CoverSS(Xg, Vg), CoverSS(Xg, Ug)
    rho_g = find_refinement(Vg, Ug)
    th = refinement_ss_morphism(rho_g, Xg, Ug, Vg, A, B)
    th2 = PageMorphism(A.ss, B.ss, 0.0, 2, page_mats={(2, p, q, t): th.get(2, p, q, t)
                                                       for (p, q) in A.ss.bidegrees() for t in range(len(grid))})
    results = {}
    for label, bound in bounds.items():
        mats, failures = {}, []
        for (p, q), e in entry_e.items():
            if e == INF or e > bound / 2 + TOL:
                failures.append(f"entry ({p},{q}) needs shift {2 * e} > {bound}")
                continue
            inv, cert = _lr_inverse(entry_morphism(th, 2, p, q), e, bound, grid)
            if inv is None:
                failures.append(f"entry ({p},{q}): " + "; ".join(cert.failures[:2]))
                continue
            for t, M in enumerate(inv):
                mats[(2, p, q, t)] = M
        if failures:
            results[label] = {"bound": bound, "ok": False, "failures": failures}
            continue
        phi = PageMorphism(B.ss, A.ss, bound, 2, page_mats=mats)
        rep = check_page_interleaving(B.ss, A.ss, phi, th2, bound, 2)
        results[label] = {"bound": bound, "ok": rep.ok, "failures": rep.failures,
                          "pages": rep.pages, "stable_page": rep.stable_page}
    return {"eps": eps, "nu": nu, "eps_positions": sorted(eps_pos), "nu_positions": sorted(nu_pos),
            "bounds": results, "grid": list(grid), "refinement": rho.named(),
            "ok": all(r["ok"] for r in results.values())}


def covers_strong_check(X, U, V):
    """Local vanishing of E^2_{p,k}(U_tau, V|U_tau) for p > 0 and every tau in N_U;
    on success the page-2 isomorphism is certified entrywise."""
    find_refinement(V, U)
    offenders = []
    for tau in U.nerve_simplices():
        members = U.piece(tau)
        Vt = V.restrict(members)
        loc = CoverSS(Vt.parent, Vt)
        for (p, q) in loc.ss.bidegrees():
            if p > 0 and any(loc.ss.dims(2, p, q)):
                offenders.append((tuple(U.names[i] for i in tau), p, q))
    if offenders:
        return {"ok": False, "offenders": offenders}
    A, B = CoverSS(X, V), CoverSS(X, U)
    th = refinement_ss_morphism(find_refinement(V, U), X, U, V, A, B)
    fails = []
    for (p, q) in sorted(set(A.ss.bidegrees()) | set(B.ss.bidegrees())):
        for t in range(len(X.grid)):
            M = th.get(2, p, q, t)
            if zero_or_iso(M, X.field) != "Id" and M.size:
                fails.append((p, q, t))
            elif M.shape[0] != M.shape[1]:
                fails.append((p, q, t))
    return {"ok": not fails, "offenders": [], "failures": fails}


def local_step(X, W, U, r):
    """eps_r and nu_r for the step W^{r+1} -> W^r of the interpolation."""
    Wn = interpolation(W, U, r + 1) if r + 1 < nerve_extent(U) else W
    eps_r, nu_r, detail = 0.0, 0.0, []
    for tau in U.nerve_simplices():
        if len(tau) != r + 1:
            continue
        members = U.piece(tau)
        Wt = Wn.restrict(members)
        loc = CoverSS(Wt.parent, Wt)
        ss = loc.ss
        e = 0.0
        for (p, q) in ss.bidegrees():
            if p > 0:
                e = max(e, max_bar(ss.barcode(2, p, q)))
        n_ = 0.0
        for q in range(ss.family.max_degree + 1):
            n_ = max(n_, *_kc_bars(edge_from_bottom(ss, q)))
        detail.append({"tau": [U.names[i] for i in tau], "eps": e, "nu": n_})
        eps_r, nu_r = max(eps_r, e), max(nu_r, n_)
    return eps_r, nu_r, detail


def local_checks(X, W, U):
    """Interpolation bound sum_r 2 max(eps_r, nu_r) between E(X, U) and E(X, W)."""
    find_refinement(W, U)
    N = nerve_extent(U)
    steps, certs = [], []
    total = 0.0
    for r in range(N):
        e, n, detail = local_step(X, W, U, r)
        steps.append({"r": r, "eps": e, "nu": n, "local": detail})
        certs += [{"r": r, **d} for d in detail]
        total += 2 * max(e, n)
    return {"steps": steps, "bound": total, "certificates": certs}


def measured_page2_distance(X, U, V):
    """Largest per-entry bottleneck distance between the page-2 barcodes of two covers."""
    A, B = CoverSS(X, U), CoverSS(X, V)
    out = 0.0
    for (p, q) in sorted(set(A.ss.bidegrees()) | set(B.ss.bidegrees())):
        out = max(out, bottleneck(A.ss.barcode(2, p, q), B.ss.barcode(2, p, q)))
    return out


def cover_stability(X, U, V):
    """R(U, V): the larger of the two interpolation bounds through the common refinement."""
    W = common_refinement(U, V, prune=True)
    arm_u = local_checks(X, W, U)
    arm_v = local_checks(X, W, V)
    R = max(arm_u["bound"], arm_v["bound"])
    return {"bound": R, "refinement": W.names, "arms": {"U": arm_u, "V": arm_v},
            "label": "position-aware (sum of 2 max(eps_r, nu_r) per step)"}
