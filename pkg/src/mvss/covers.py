"""Covers by subcomplexes, filtered nerves, pieces and refinement maps."""
from dataclasses import dataclass
from itertools import combinations, product

from .complex import FilteredComplex, Cell, ComplexError


class CoverError(ValueError):
    pass


class Cover:
    """Named family of face-closed cell sets whose union is the whole complex."""

    def __init__(self, parent, sets, names=None, check=True):
        if isinstance(sets, dict):
            names = list(sets.keys())
            sets = list(sets.values())
        sets = [frozenset(s) for s in sets]
        if names is None:
            names = [f"U{i}" for i in range(len(sets))]
        if len(names) != len(sets) or len(set(names)) != len(names):
            raise CoverError("cover set names must be distinct and match the sets")
        self.parent = parent
        self.names = list(names)
        self.sets = sets
        self._nerve = None
        self._pieces = {}
        if check:
            self.validate()

    def __len__(self):
        return len(self.sets)

    def __repr__(self):
        return f"Cover({dict(zip(self.names, (len(s) for s in self.sets)))})"

    def validate(self):
        n = len(self.parent.cells)
        union = set()
        for name, s in zip(self.names, self.sets):
            bad = [c for c in s if not 0 <= c < n]
            if bad:
                raise CoverError(f"set {name!r} references unknown cell id {bad[0]}")
            if not self.parent.is_closed(s):
                raise CoverError(f"set {name!r} is not closed under faces")
            union |= s
        missing = set(range(n)) - union
        if missing:
            raise CoverError(f"cells not covered: {sorted(missing)[:10]}")

    def set_named(self, name):
        return self.sets[self.names.index(name)]

    def piece(self, sigma):
        """Intersection of the sets indexed by sigma (a tuple of set indices)."""
        sigma = tuple(sorted(sigma))
        if sigma not in self._pieces:
            out = self.sets[sigma[0]]
            for i in sigma[1:]:
                out = out & self.sets[i]
            self._pieces[sigma] = out
        return self._pieces[sigma]

    def piece_birth(self, sigma):
        pc = self.piece(sigma)
        if not pc:
            return None
        return min(self.parent.cells[c].birth for c in pc)

    def nerve_simplices(self):
        """All index tuples with nonempty intersection, faces first."""
        out = []
        m = len(self.sets)

        def grow(sigma, cur):
            for j in range(sigma[-1] + 1, m):
                nxt = cur & self.sets[j]
                if nxt:
                    tau = sigma + (j,)
                    self._pieces[tau] = nxt
                    out.append(tau)
                    grow(tau, nxt)

        for i in range(m):
            if self.sets[i]:
                self._pieces[(i,)] = self.sets[i]
                out.append((i,))
                grow((i,), self.sets[i])
        out.sort(key=lambda s: (len(s), s))
        return out

    def nerve(self):
        if self._nerve is None:
            self._nerve = nerve(self)
        return self._nerve

    def restrict(self, members):
        """Cover of the subcomplex ``members`` by the traces of the sets."""
        sub, new_of, old = self.parent.subcomplex(members)
        names, sets = [], []
        for name, s in zip(self.names, self.sets):
            tr = s & frozenset(members)
            if tr:
                names.append(name)
                sets.append(frozenset(new_of[c] for c in tr))
        return Cover(sub, sets, names)

    def to_json(self):
        return {"sets": {n: sorted(s) for n, s in zip(self.names, self.sets)}}


def nerve(cover):
    """Filtered nerve: a simplex per nonempty intersection, born when it first becomes nonempty."""
    from .complex import build_simplicial
    simplices = cover.nerve_simplices()
    g = cover.parent.grid
    spec = [(list(s), g[cover.piece_birth(s)]) for s in simplices]
    if not spec:
        raise CoverError("empty cover")
    return build_simplicial(spec, field=cover.parent.field, grid=g, auto_complete=False)


def piece(cover, sigma):
    """The intersection subcomplex as a FilteredComplex, with the id maps."""
    members = cover.piece(tuple(sigma))
    return cover.parent.subcomplex(members)


@dataclass
class RefinementMap:
    source: Cover
    target: Cover
    assign: tuple

    def image(self, sigma):
        """Image simplex as (sorted tuple, sign), or None when dimension drops."""
        img = [self.assign[i] for i in sigma]
        if len(set(img)) < len(img):
            return None
        perm = sorted(range(len(img)), key=lambda i: img[i])
        return tuple(sorted(img)), _perm_sign(perm)

    def named(self):
        return {self.source.names[i]: self.target.names[j] for i, j in enumerate(self.assign)}


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, L = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            L += 1
        if L % 2 == 0:
            sign = -sign
    return sign


def containing_sets(V, U):
    out = []
    for s in V.sets:
        out.append([j for j, u in enumerate(U.sets) if s <= u])
    return out


def find_refinement(V, U):
    """Refinement map V -> U choosing the first containing U-set by name."""
    if V.parent is not U.parent and len(V.parent.cells) != len(U.parent.cells):
        raise CoverError("covers of different complexes")
    opts = containing_sets(V, U)
    bad = [V.names[i] for i, o in enumerate(opts) if not o]
    if bad:
        raise CoverError(f"not a refinement: {bad} fit in no single set")
    assign = tuple(min(o, key=lambda j: U.names[j]) for o in opts)
    return RefinementMap(V, U, assign)


def all_refinements(V, U, limit=64):
    opts = containing_sets(V, U)
    if any(not o for o in opts):
        return []
    out = []
    for choice in product(*opts):
        out.append(RefinementMap(V, U, tuple(choice)))
        if len(out) >= limit:
            break
    return out


def refines(V, U):
    try:
        find_refinement(V, U)
        return True
    except CoverError:
        return False


def common_refinement(U, V, prune=False):
    """Cover by the nonempty pairwise intersections U_i & V_j.

    With ``prune`` the sets contained in another set of the family are dropped
    (the result is refined by and refines the unpruned one).
    """
    names, sets = [], []
    for a, u in zip(U.names, U.sets):
        for b, v in zip(V.names, V.sets):
            s = u & v
            if s:
                names.append(f"{a}&{b}")
                sets.append(s)
    if prune:
        keep = []
        for i, s in enumerate(sets):
            dominated = False
            for j, t in enumerate(sets):
                if i != j and s <= t and (s != t or j < i):
                    dominated = True
                    break
            if not dominated:
                keep.append(i)
        names = [names[i] for i in keep]
        sets = [sets[i] for i in keep]
    return Cover(U.parent, sets, names)


def strict_intersections(U, r):
    """Pieces U_tau for tau in the nerve of U of dimension r."""
    return [(tau, U.piece(tau)) for tau in U.nerve_simplices() if len(tau) == r + 1]


def interpolation(W, U, r):
    """The cover W together with the strict r-fold intersections of U."""
    if r < 0:
        raise CoverError("r must be nonnegative")
    find_refinement(W, U)
    names = list(W.names)
    sets = list(W.sets)
    for tau, s in strict_intersections(U, r):
        names.append("U[" + ",".join(U.names[i] for i in tau) + "]")
        sets.append(s)
    return Cover(W.parent, sets, names)


def nerve_extent(U):
    """Smallest N with no strict N-fold intersections."""
    return max(len(t) for t in U.nerve_simplices())


def cover_from_cells(K, named_seeds):
    """Cover whose sets are the closures of the given seed cells."""
    return Cover(K, {n: K.closure(seeds) for n, seeds in named_seeds.items()})


def whole(K, name="X"):
    return Cover(K, {name: frozenset(range(len(K.cells)))})


def adjoin_whole(U, name="X"):
    names = list(U.names) + [name]
    sets = list(U.sets) + [frozenset(range(len(U.parent.cells)))]
    return Cover(U.parent, sets, names)
