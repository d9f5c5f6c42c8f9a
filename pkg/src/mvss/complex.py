"""Filtered regular cell complexes over F_p with exact boundary data."""
from dataclasses import dataclass, field
from itertools import combinations
import bisect
import math
import warnings

import numpy as np

from . import linalg

TOL = 1e-9


class ComplexError(ValueError):
    pass


class FiltrationGrid:
    """Finite strictly increasing grid of filtration values."""

    def __init__(self, values):
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ComplexError("grid needs at least one value")
        for a, b in zip(vals, vals[1:]):
            if not b > a:
                raise ComplexError(f"grid not strictly increasing at {a}, {b}")
        self.values = vals

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        return isinstance(other, FiltrationGrid) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        return f"FiltrationGrid({list(self.values)})"

    def index(self, value):
        """Grid index of a value that lies on the grid."""
        i = bisect.bisect_left(self.values, value - TOL)
        if i < len(self.values) and abs(self.values[i] - value) <= TOL:
            return i
        raise ComplexError(f"value {value} is not on the grid")

    def snap_value(self, value):
        """Smallest grid index whose value is >= value (clamped to the last index)."""
        i = bisect.bisect_left(self.values, value - TOL)
        return min(i, len(self.values) - 1)

    def floor_index(self, value):
        """Largest grid index whose value is <= value, or -1."""
        return bisect.bisect_right(self.values, value + TOL) - 1

    def shift(self, t, eps):
        """Index of the value t + eps snapped up to the grid."""
        if eps <= TOL:
            return t
        return self.snap_value(self.values[t] + eps)

    def closed_under(self, shifts, max_size=5000):
        """Refine the grid so that adding any of ``shifts`` lands on grid values."""
        shifts = [float(s) for s in shifts if s > TOL]
        vals = set(self.values)
        top = self.values[-1]
        frontier = list(vals)
        while frontier:
            new = []
            for v in frontier:
                for s in shifts:
                    w = round(v + s, 12)
                    if w <= top + TOL and not any(abs(w - u) <= TOL for u in _near(vals, w)):
                        vals.add(w)
                        new.append(w)
            if len(vals) > max_size:
                raise ComplexError("grid refinement too large")
            frontier = new
        return FiltrationGrid(sorted(vals))


def _near(vals, w):
    return [u for u in vals if abs(u - w) < 1e-6]


@dataclass(frozen=True)
class Cell:
    id: int
    dim: int
    birth: int
    boundary: tuple = ()
    label: object = None


class FilteredComplex:
    """A finite regular cell complex with births on a grid, over F_p.

    Cell ids are positions in ``cells``; faces precede cofaces.
    """

    def __init__(self, cells, grid, field=2, validate=True):
        if not linalg.is_prime(field):
            raise ComplexError(f"field characteristic {field} is not prime")
        self.field = int(field)
        self.grid = grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)
        self.cells = list(cells)
        self._label_index = None
        self._by_dim = None
        if validate:
            self.validate()

    # basic structure
    def __len__(self):
        return len(self.cells)

    def __repr__(self):
        counts = self.counts()
        return f"FilteredComplex(p={self.field}, cells={counts}, grid={list(self.grid)})"

    @property
    def max_dim(self):
        return max((c.dim for c in self.cells), default=-1)

    def counts(self):
        out = {}
        for c in self.cells:
            out[c.dim] = out.get(c.dim, 0) + 1
        return [out.get(d, 0) for d in range(self.max_dim + 1)]

    def by_dim(self, d):
        if self._by_dim is None:
            bd = {}
            for c in self.cells:
                bd.setdefault(c.dim, []).append(c.id)
            self._by_dim = bd
        return self._by_dim.get(d, [])

    def cells_at(self, d, t):
        return [i for i in self.by_dim(d) if self.cells[i].birth <= t]

    def label_index(self):
        if self._label_index is None:
            self._label_index = {c.label: c.id for c in self.cells if c.label is not None}
        return self._label_index

    def find(self, label):
        try:
            return self.label_index()[label]
        except KeyError:
            raise ComplexError(f"no cell with label {label!r}") from None

    def birth_value(self, cid):
        return self.grid[self.cells[cid].birth]

    def validate(self):
        p = self.field
        n = len(self.grid)
        for pos, c in enumerate(self.cells):
            if c.id != pos:
                raise ComplexError(f"cell at position {pos} has id {c.id}")
            if c.dim < 0:
                raise ComplexError(f"cell {c.id} has negative dimension")
            if not 0 <= c.birth < n:
                raise ComplexError(f"cell {c.id} birth index {c.birth} off the grid")
            seen = set()
            for f, coeff in c.boundary:
                if not 0 <= f < pos:
                    raise ComplexError(f"cell {c.id}: face {f} does not precede it")
                if f in seen:
                    raise ComplexError(f"cell {c.id}: duplicate face {f}")
                seen.add(f)
                if coeff % p == 0:
                    raise ComplexError(f"cell {c.id}: zero coefficient on face {f}")
                fc = self.cells[f]
                if fc.dim != c.dim - 1:
                    raise ComplexError(f"cell {c.id}: face {f} has wrong dimension")
                if fc.birth > c.birth:
                    raise ComplexError(f"cell {c.id}: face {f} born after it")
        for d in range(1, self.max_dim):
            prod = linalg.matmul(self.boundary_matrix(d), self.boundary_matrix(d + 1), p)
            if prod.any():
                raise ComplexError(f"boundary squared is nonzero in dimension {d + 1}")
        return True

    def boundary_matrix(self, dim, t=None, with_ids=False):
        """Matrix of the boundary C_dim -> C_{dim-1} at grid index t (None = all)."""
        if dim < 0:
            raise ComplexError("negative dimension")
        if t is None:
            t = len(self.grid) - 1
        if not 0 <= t < len(self.grid):
            raise ComplexError(f"grid index {t} out of range")
        cols = self.cells_at(dim, t)
        rows = self.cells_at(dim - 1, t) if dim > 0 else []
        rpos = {r: i for i, r in enumerate(rows)}
        M = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for j, cid in enumerate(cols):
            for f, coeff in self.cells[cid].boundary:
                M[rpos[f], j] = coeff % self.field
        if with_ids:
            return M, rows, cols
        return M

    def boundary_chain(self, cid):
        return {f: c % self.field for f, c in self.cells[cid].boundary}

    # faces and subcomplexes
    def closure(self, seeds):
        seeds = list(seeds)
        for s in seeds:
            if not 0 <= s < len(self.cells):
                raise ComplexError(f"unknown cell id {s}")
        out = set()
        stack = list(seeds)
        while stack:
            c = stack.pop()
            if c in out:
                continue
            out.add(c)
            stack.extend(f for f, _ in self.cells[c].boundary)
        return frozenset(out)

    def is_closed(self, members):
        members = set(members)
        return all(f in members for c in members for f, _ in self.cells[c].boundary)

    def subcomplex(self, members):
        """Closed subset as its own FilteredComplex plus (old -> new) and (new -> old) maps."""
        members = sorted(members)
        if not self.is_closed(members):
            raise ComplexError("subcomplex is not closed under faces")
        new_of = {old: i for i, old in enumerate(members)}
        cells = []
        for old in members:
            c = self.cells[old]
            cells.append(Cell(new_of[old], c.dim, c.birth,
                              tuple((new_of[f], k) for f, k in c.boundary), c.label))
        sub = FilteredComplex(cells, self.grid, self.field, validate=False)
        return sub, new_of, members

    def with_grid(self, grid):
        """Same cells with births re-indexed on a finer grid containing the old one."""
        grid = grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)
        remap = [grid.index(v) for v in self.grid]
        cells = [Cell(c.id, c.dim, remap[c.birth], c.boundary, c.label) for c in self.cells]
        return FilteredComplex(cells, grid, self.field, validate=False)

    def with_field(self, p):
        return FilteredComplex(self.cells, self.grid, p, validate=True)

    def face_order(self):
        """Strict face partial order: cell -> set of all proper faces (transitive)."""
        below = []
        for c in self.cells:
            s = set()
            for f, _ in c.boundary:
                s.add(f)
                s |= below[f]
            below.append(frozenset(s))
        return below


@dataclass
class SubComplex:
    parent: FilteredComplex
    members: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        self.members = frozenset(self.members)
        if not self.parent.is_closed(self.members):
            raise ComplexError("subcomplex is not closed under faces")

    def __len__(self):
        return len(self.members)

    def __contains__(self, c):
        return c in self.members


def closure(complex_, seeds):
    return SubComplex(complex_, complex_.closure(seeds))


def boundary_matrix(complex_, dim, t=None):
    return complex_.boundary_matrix(dim, t)


def _grid_of(grid, values):
    if grid is None:
        return FiltrationGrid(sorted(set(float(v) for v in values)) or [0.0])
    return grid if isinstance(grid, FiltrationGrid) else FiltrationGrid(grid)


def _assemble(items, grid, field, sign):
    """items: dict label -> (dim, birth index, faces list of (label, sign)).

    Orders cells by (dim, birth, label) so faces precede cofaces.
    """
    order = sorted(items, key=lambda lab: (items[lab][0], items[lab][1], lab))
    ids = {lab: i for i, lab in enumerate(order)}
    cells = []
    for lab in order:
        d, b, faces = items[lab]
        bd = tuple((ids[f], s % field) for f, s in faces if s % field)
        cells.append(Cell(ids[lab], d, b, bd, lab))
    return FilteredComplex(cells, grid, field)


def build_simplicial(simplices, field=2, grid=None, auto_complete=True):
    """Simplicial complex from (vertex list, birth value) pairs.

    Missing faces get the minimum birth of the listed cofaces when
    ``auto_complete`` is on; otherwise they are an error.
    """
    simplices = list(simplices)
    grid = _grid_of(grid, [b for _, b in simplices])
    given = {}
    for verts, b in simplices:
        key = tuple(verts)
        if list(key) != sorted(set(key)):
            raise ComplexError(f"vertex list {list(verts)} not sorted and duplicate free")
        if not key:
            raise ComplexError("empty simplex")
        t = grid.index(b)
        given[key] = min(t, given.get(key, t))
    births = dict(given)
    if auto_complete:
        for key, t in sorted(given.items(), key=lambda kv: -len(kv[0])):
            for k in range(1, len(key)):
                for face in combinations(key, k):
                    if face not in births or births[face] > t:
                        births[face] = t if face not in given else min(given[face], t)
        # propagate minima downward so faces never come after cofaces
        for key in sorted(births, key=len, reverse=True):
            for k in range(1, len(key)):
                for face in combinations(key, k):
                    births[face] = min(births[face], births[key])
    else:
        for key, t in births.items():
            for i in range(len(key)) if len(key) > 1 else []:
                face = key[:i] + key[i + 1:]
                if face not in births:
                    raise ComplexError(f"face {list(face)} of {list(key)} missing")
                if births[face] > t:
                    raise ComplexError(f"face {list(face)} born after {list(key)}")
    items = {}
    for key, t in births.items():
        faces = []
        if len(key) > 1:
            for i in range(len(key)):
                faces.append((key[:i] + key[i + 1:], (-1) ** i))
        items[key] = (len(key) - 1, t, faces)
    return _assemble(items, grid, field, True)


def cube_faces(cube):
    """Codimension-one faces of an interval product with standard signs."""
    out = []
    k = 0
    for i, (a, b) in enumerate(cube):
        if a == b:
            continue
        lo = cube[:i] + ((a, a),) + cube[i + 1:]
        hi = cube[:i] + ((b, b),) + cube[i + 1:]
        s = (-1) ** k
        out.append((hi, s))
        out.append((lo, -s))
        k += 1
    return out


def cube_dim(cube):
    return sum(1 for a, b in cube if a != b)


def _all_faces_cube(cube):
    faces = {cube}
    stack = [cube]
    while stack:
        c = stack.pop()
        for f, _ in cube_faces(c):
            if f not in faces:
                faces.add(f)
                stack.append(f)
    return faces


def build_cubical(top_cells, field=2, grid=None):
    """Cubical complex from (interval product, birth value) pairs.

    An interval product is a tuple of (a, b) integer pairs with b in {a, a+1}.
    Every face gets the minimum birth over the listed cells containing it.
    """
    top_cells = list(top_cells)
    grid = _grid_of(grid, [b for _, b in top_cells])
    births = {}
    listed = {}
    for cube, b in top_cells:
        cube = tuple((int(a), int(c)) for a, c in cube)
        for a, c in cube:
            if c not in (a, a + 1):
                raise ComplexError(f"interval ({a}, {c}) is neither degenerate nor unit")
        t = grid.index(b)
        if cube in listed and listed[cube] != t:
            warnings.warn(f"cell {cube} listed with births {listed[cube]} and {t}; keeping the minimum")
        listed[cube] = min(t, listed.get(cube, t))
        for f in _all_faces_cube(cube):
            births[f] = min(t, births.get(f, t))
    for cube, t in listed.items():
        if births[cube] < t:
            warnings.warn(f"cell {cube} listed at index {t} but a coface forces index {births[cube]}")
    items = {}
    for cube, t in births.items():
        items[cube] = (cube_dim(cube), t, cube_faces(cube))
    return _assemble(items, grid, field, True)


def pairwise_distances(points):
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    diff = P[:, None, :] - P[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


def build_vietoris_rips(points, max_dim=1, grid=None, field=2):
    """Vietoris-Rips flag complex; simplex birth = diameter snapped up to the grid."""
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        raise ComplexError("empty point set")
    if P.ndim == 1:
        P = P[:, None]
    D = pairwise_distances(P)
    n = len(P)
    if grid is None:
        vals = {0.0} | {round(float(D[i, j]), 12) for i in range(n) for j in range(i + 1, n)}
        grid = FiltrationGrid(sorted(vals))
    elif not isinstance(grid, FiltrationGrid):
        grid = FiltrationGrid(grid)
    items = {}
    for i in range(n):
        items[(i,)] = (0, 0, [])
    for k in range(2, max_dim + 2):
        for simplex in combinations(range(n), k):
            diam = max(D[a, b] for a, b in combinations(simplex, 2))
            if diam > grid[-1] + TOL:
                continue
            t = grid.snap_value(diam)
            faces = [(simplex[:i] + simplex[i + 1:], (-1) ** i) for i in range(k)]
            if any(f not in items for f, _ in faces):
                continue
            items[simplex] = (k - 1, max(t, max(items[f][1] for f, _ in faces)), faces)
    return _assemble(items, grid, field, True)


def is_prime(p):
    return linalg.is_prime(p)


def shifted_index(grid, t, eps):
    return grid.shift(t, eps)


def value_inf(x):
    return x is None or (isinstance(x, float) and math.isinf(x))
