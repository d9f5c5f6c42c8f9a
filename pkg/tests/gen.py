"""Random instances for property and acceptance tests (seeded numpy generators)."""
from itertools import combinations

import numpy as np

from mvss.complex import FiltrationGrid, build_simplicial
from mvss.covers import Cover


def random_complex(rng, n_vertices=None, max_cells=40, grid_size=None, field=2, max_dim=3,
                   vertices_at_zero=False):
    """Random tame filtered simplicial complex with at most ``max_cells`` cells.

    ``vertices_at_zero`` gives a constant vertex set, as join diagrams need.
    """
    nv = n_vertices or int(rng.integers(4, 8))
    T = grid_size or int(rng.integers(2, 5))
    grid = FiltrationGrid([float(i) for i in range(T)])
    top = min(max_dim, nv - 1)
    simplices = None
    for _ in range(100):
        tops = set()
        for _ in range(int(rng.integers(3, 8))):
            k = int(rng.integers(1, top + 1)) + 1
            tops.add(tuple(sorted(rng.choice(nv, k, replace=False).tolist())))
        cand = {(v,) for v in range(nv)}
        for s in tops:
            for r in range(1, len(s) + 1):
                cand |= set(combinations(s, r))
        if len(cand) <= max_cells and len(_maximal(cand)) >= 2:
            simplices = cand
            break
    if simplices is None:
        simplices = {(v,) for v in range(nv)} | {(v, v + 1) for v in range(nv - 1)}
    births = {}
    for s in sorted(simplices, key=lambda s: (len(s), s)):
        lo = max((births[f] for f in combinations(s, len(s) - 1) if f), default=0)
        births[s] = 0 if vertices_at_zero and len(s) == 1 else max(lo, int(rng.integers(0, T)))
    spec = [(list(s), grid[b]) for s, b in births.items()]
    return build_simplicial(spec, field, grid)


def _maximal(simplices):
    return [s for s in simplices if not any(set(s) < set(o) for o in simplices)]


def random_cover(rng, K, n_sets=None):
    """Random cover by closures of groups of maximal cells; every maximal cell is used."""
    faces = set()
    for c in K.cells:
        faces |= {f for f, _ in c.boundary}
    tops = [c.id for c in K.cells if c.id not in faces]
    k = n_sets or int(rng.integers(2, 5))
    groups = [[] for _ in range(k)]
    for i, c in enumerate(rng.permutation(tops)):
        groups[i % k if i < k else int(rng.integers(k))].append(int(c))
        if rng.random() < 0.3:
            groups[int(rng.integers(k))].append(int(c))
    sets = {f"S{i}": K.closure(g) for i, g in enumerate(groups) if g}
    return Cover(K, sets)


def random_partition(rng, K, n_blocks=None):
    verts = sorted(c.label[0] for c in K.cells if c.dim == 0)
    k = n_blocks or int(rng.integers(2, min(4, len(verts)) + 1))
    perm = rng.permutation(verts).tolist()
    blocks = [perm[i::k] for i in range(k)]
    return [sorted(b) for b in blocks if b]


def random_refinement_pair(rng, K, want_choices=False):
    """(U, V) with V refining U: U from random_cover, V splits each U set into
    closures of some of its maximal cells (plus small overlaps)."""
    for _ in range(50):
        U = random_cover(rng, K)
        sets = {}
        for name, s in zip(U.names, U.sets):
            below = set()
            for c in s:
                below |= {f for f, _ in K.cells[c].boundary}
            tops = sorted(c for c in s if c not in below)
            parts = int(rng.integers(1, len(tops) + 1))
            for i in range(parts):
                chunk = tops[i::parts]
                sets[f"{name}.{i}"] = K.closure(chunk)
        V = Cover(K, sets)
        if not want_choices:
            return U, V
        from mvss.covers import all_refinements
        if len(all_refinements(V, U, limit=4)) >= 2:
            return U, V
    return None


def perturb_births(rng, K, steps=1):
    """Same cells with births moved by at most ``steps`` grid indices, kept monotone."""
    from mvss.complex import Cell, FilteredComplex
    T = len(K.grid)
    new = []
    for c in K.cells:
        b = int(np.clip(c.birth + rng.integers(-steps, steps + 1), 0, T - 1))
        b = max([b] + [new[f].birth for f, _ in c.boundary])
        b = min(b, c.birth + steps)
        new.append(Cell(c.id, c.dim, b, c.boundary, c.label))
    return FilteredComplex(new, K.grid, K.field)


def vertex_ids(K):
    return {c.label[0]: c.id for c in K.cells if c.dim == 0}
