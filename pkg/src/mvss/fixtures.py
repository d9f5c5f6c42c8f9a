"""Fixture generators for the worked examples used throughout the tests and CLI."""
import numpy as np

from .complex import build_cubical, build_simplicial, FiltrationGrid
from .covers import Cover


def _sq(x, y):
    return ((x, x + 1), (y, y + 1))


def _eh(x, y):
    return ((x, x + 1), (y, y))


def _ev(x, y):
    return ((x, x), (y, y + 1))


def fig4(field=2):
    """Rectangle a..h of three unit squares A, B, C.

    Boundary of the rectangle at 0; edge bf and square A at 1; edge cg and
    square B at 2; square C at 3.
    """
    cells = [(_eh(x, y), 0) for x in range(3) for y in (0, 1)]
    cells += [(_ev(0, 0), 0), (_ev(3, 0), 0)]
    cells += [(_ev(1, 0), 1), (_sq(0, 0), 1), (_ev(2, 0), 2), (_sq(1, 0), 2), (_sq(2, 0), 3)]
    X = build_cubical(cells, field, FiltrationGrid([0, 1, 2, 3]))
    sq = {n: X.find(_sq(i, 0)) for i, n in enumerate("ABC")}
    clo = {n: X.closure([c]) for n, c in sq.items()}
    covers = {
        "U0": Cover(X, {"A": clo["A"], "B": clo["B"], "C": clo["C"]}),
        "U1": Cover(X, {"A": clo["A"], "BC": clo["B"] | clo["C"]}),
        "U2": Cover(X, {"X": frozenset(range(len(X.cells)))}),
        # the two covers of the pair-complex illustration
        "U": Cover(X, {"A": clo["A"], "BC": clo["B"] | clo["C"]}),
        "V": Cover(X, {"AB": clo["A"] | clo["B"], "C": clo["C"]}),
    }
    return X, covers


def fig6_eps(eps=0.5, field=2):
    """2x2 grid of unit squares A (bottom left), B, C, D (top right).

    Outer boundary at 0; center vertex and the two middle horizontal edges at
    1; middle vertical edges and all squares at 1 + eps.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    t1, t2 = 1.0, 1.0 + eps
    cells = []
    for x in range(2):
        cells += [(_eh(x, 0), 0.0), (_eh(x, 2), 0.0), (_eh(x, 1), t1)]
    for y in range(2):
        cells += [(_ev(0, y), 0.0), (_ev(2, y), 0.0), (_ev(1, y), t2)]
    cells += [(((1, 1), (1, 1)), t1)]
    for x in range(2):
        for y in range(2):
            cells.append((_sq(x, y), t2))
    X = build_cubical(cells, field, FiltrationGrid([0.0, t1, t2]))
    sq = {"A": _sq(0, 0), "B": _sq(1, 0), "C": _sq(0, 1), "D": _sq(1, 1)}
    clo = {n: X.closure([X.find(c)]) for n, c in sq.items()}
    V = Cover(X, clo)
    U = Cover(X, {"AB": clo["A"] | clo["B"], "CD": clo["C"] | clo["D"]})
    return X, {"V": V, "U": U}


def seven_simplex_join(field=2):
    """The full simplex on 8 vertices with partition blocks of sizes 3, 3 and 2."""
    from itertools import combinations
    verts = list(range(8))
    simplices = [(list(s), 0.0) for r in range(1, 9) for s in combinations(verts, r)]
    K = build_simplicial(simplices, field, FiltrationGrid([0.0]))
    return K, [[0, 1, 2], [3, 4, 5], [6, 7]]


def fig2_join(field=2):
    """Five vertices split into blocks U = {0, 1, 2} and V = {3, 4}, filtered in three steps."""
    simplices = [
        ([0], 0), ([1], 0), ([2], 0), ([3], 0), ([4], 0),
        ([0, 1], 0), ([1, 2], 0), ([3, 4], 0), ([0, 3], 0), ([2, 4], 0),
        ([1, 3], 1), ([0, 1, 3], 1), ([1, 4], 1), ([1, 3, 4], 2), ([1, 2, 4], 2),
    ]
    K = build_simplicial(simplices, field, FiltrationGrid([0, 1, 2]))
    return K, [[0, 1, 2], [3, 4]]


def vr_circle(n=12, jitter=0.0, radius=1.0, seed=0):
    """Points on a circle with optional uniform radial jitter."""
    rng = np.random.default_rng(seed)
    ang = 2 * np.pi * np.arange(n) / n
    r = radius + (rng.uniform(-jitter, jitter, n) if jitter else 0.0)
    return np.column_stack([r * np.cos(ang), r * np.sin(ang)])


FIXTURES = ("fig4", "fig6_eps", "seven_simplex_join", "fig2_join", "vr_circle")
