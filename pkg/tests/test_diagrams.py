import numpy as np
import pytest
from hypothesis import given, strategies as st

import gen as G
from mvss.complex import FiltrationGrid
from mvss.complex import build_cubical
from mvss.covers import Cover, whole
from mvss.diagrams import (DiagramError, cover_diagram, join_diagram, multinerve, pi0_diagram, point_diagram,
                           realization, total_complex_check)
from mvss.fixtures import fig2_join, fig4, fig6_eps, seven_simplex_join
from mvss.persistence import Barcode, compute_ph

INF = float("inf")


def _same_ph(K, L, top):
    a, b = compute_ph(K, top), compute_ph(L, top)
    return all(a[k] == b[k] for k in range(top + 1))


def test_single_set_diagram():
    X, _ = fig4()
    D = cover_diagram(X, whole(X))
    assert D.index == [(0,)]
    assert len(D.fibers[(0,)]) == len(X)
    assert _same_ph(realization(D).complex, X, 2)


def test_fig4_u0_diagram():
    X, C = fig4()
    D = cover_diagram(X, C["U0"])
    assert D.index == [(0,), (1,), (2,), (0, 1), (1, 2)]
    assert not D.validate()
    relations = [(t, s) for s in D.index for t in D.index if len(t) == len(s) - 1 and set(t) < set(s)]
    assert len(relations) == 4


def test_fig6_v_diagram():
    X, C = fig6_eps(0.5)
    D = cover_diagram(X, C["V"])
    assert len(D.index) == 15
    center = [s for s in D.index if len(s) >= 3]
    assert all(len(D.fibers[s]) == 1 for s in center)


def test_pi0_fig4_overlap():
    X, C = fig4()
    P = pi0_diagram(cover_diagram(X, C["U0"]))
    assert len(P.components((0, 1), 0)) == 2
    assert len(P.components((0, 1), 1)) == 1
    assert len(P.components((1, 2), 1)) == 2
    assert len(P.components((1, 2), 2)) == 1
    assert not P.is_point_diagram()
    reps = P.components((0, 1), 0)
    assert {P.merge((0, 1), 0, r) for r in reps} == set(P.components((0, 1), 1))


def test_point_diagram():
    g = FiltrationGrid([0, 1])
    D = point_diagram(g)
    B = realization(D)
    assert len(B) == 1 and B.complex.cells[0].dim == 0
    assert pi0_diagram(D).is_point_diagram()
    assert total_complex_check(D)["ok"]
    mn = multinerve(D)
    assert mn.barcode(0) == Barcode(0, [(0, INF)])


def test_multinerve_fig4():
    X, C = fig4()
    mn = multinerve(cover_diagram(X, C["U0"]))
    # at t=0 the fiber over B has two components (its vertical edges are born
    # later), so four vertices and four edges leave one loop until cg appears at 2
    assert [len(mn.cells_at(t)) for t in range(4)] == [8, 6, 5, 5]
    assert mn.barcode(0) == Barcode(0, [(0, INF)])
    assert mn.barcode(1) == Barcode(1, [(0, 2)])


def test_multinerve_connected_fibers_is_nerve():
    # four unit squares in a ring, everything born at 0: all pieces are connected
    sq = [((0, 1), (0, 1)), ((1, 2), (0, 1)), ((1, 2), (1, 2)), ((0, 1), (1, 2))]
    X = build_cubical([(c, 0) for c in sq] + [(((3, 4), (0, 1)), 1)], grid=[0, 1])
    U = Cover(X, {n: X.closure([X.find(c)]) for n, c in zip("ABCD", sq)} |
              {"E": X.closure([X.find(((3, 4), (0, 1)))])})
    D = cover_diagram(X, U)
    assert pi0_diagram(D).is_point_diagram()
    mn, N = multinerve(D), U.nerve()
    ph = compute_ph(N, 1)
    assert mn.barcode(0) == ph[0] and mn.barcode(1) == ph[1]


def test_join_fixtures():
    for K, P in (fig2_join(), seven_simplex_join()):
        B = realization(join_diagram(K, P))
        assert _same_ph(B.complex, K, K.max_dim)
    K, P = seven_simplex_join()
    bars = compute_ph(realization(join_diagram(K, P)).complex, 3)
    assert bars[0] == Barcode(0, [(0, INF)]) and all(len(b) == 0 for b in bars[1:])


def test_join_singletons():
    K, _ = fig2_join()
    D = join_diagram(K, [[v] for v in range(5)])
    assert _same_ph(realization(D).complex, K, 2)


def test_join_rejects_bad_partition():
    K, _ = fig2_join()
    with pytest.raises(DiagramError):
        join_diagram(K, [[0, 1], [3, 4]])


def test_total_complex_fixtures():
    X, C = fig4(3)
    for name in ("U0", "U1", "U2"):
        assert total_complex_check(cover_diagram(X, C[name]))["ok"]
    Y, C6 = fig6_eps(0.5, 3)
    rep = total_complex_check(cover_diagram(Y, C6["V"]))
    assert rep["ok"] and rep["grid_indices"] == 3


def test_fault_injection_is_reported():
    X, C = fig4(3)
    D = cover_diagram(X, C["U0"])
    m = D.face_map((0,), (0, 1))
    edge = next(c for c, img in m.items() if D.fibers[(0, 1)].cells[c].dim == 1)
    bad = {c: dict(img) for c, img in m.items()}
    bad[edge] = {}
    D.set_face_map((0,), (0, 1), bad)
    problems = D.validate(raise_on_error=False)
    assert any("not a chain map" in s for s in problems)
    with pytest.raises(DiagramError):
        realization(D)


@given(st.integers(0, 2 ** 32 - 1))
def test_random_cover_diagrams(seed):
    rng = np.random.default_rng(seed)
    K = G.random_complex(rng, field=int(rng.choice([2, 3])))
    U = G.random_cover(rng, K)
    D = cover_diagram(K, U)
    assert total_complex_check(D)["ok"]
    assert _same_ph(realization(D).complex, K, 2)


@given(st.integers(0, 2 ** 32 - 1))
def test_random_join_diagrams(seed):
    rng = np.random.default_rng(seed)
    K = G.random_complex(rng, field=int(rng.choice([2, 3])), vertices_at_zero=True)
    D = join_diagram(K, G.random_partition(rng, K))
    assert not D.validate()
    assert total_complex_check(D)["ok"]
    assert _same_ph(realization(D).complex, K, K.max_dim)
