import numpy as np
import pytest
from hypothesis import given, strategies as st

import gen as G
from mvss.complex import build_simplicial
from mvss.covers import (Cover, CoverError, adjoin_whole, all_refinements, common_refinement, find_refinement,
                         interpolation, nerve_extent, refines, whole)
from mvss.fixtures import fig4, fig6_eps


def _nerve_births(U):
    N = U.nerve()
    return {tuple(U.names[i] for i in c.label): N.birth_value(c.id) for c in N.cells}


def test_single_set_nerve():
    X, _ = fig4()
    N = whole(X).nerve()
    assert len(N) == 1 and N.cells[0].dim == 0


def test_fig4_nerve():
    X, C = fig4()
    assert _nerve_births(C["U0"]) == {("A",): 0, ("B",): 0, ("C",): 0, ("A", "B"): 0, ("B", "C"): 0}


def test_fig6_nerve():
    X, C = fig6_eps(0.5)
    b = _nerve_births(C["V"])
    assert len(b) == 15
    for pair in (("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")):
        assert b[pair] == 0
    # the diagonal pairs and all higher simplices only meet at the center vertex
    assert b[("A", "D")] == 1 and b[("B", "C")] == 1 and b[("A", "B", "C", "D")] == 1


def test_cover_validation():
    X, C = fig4()
    A = C["U0"].set_named("A")
    with pytest.raises(CoverError, match="not covered"):
        Cover(X, {"A": A})
    with pytest.raises(CoverError, match="not closed"):
        Cover(X, {"X": frozenset(range(len(X))), "bad": frozenset([max(A)])})
    with pytest.raises(CoverError, match="unknown cell id"):
        Cover(X, {"X": frozenset(range(len(X))), "bad": frozenset([999])})


def test_piece_is_intersection():
    X, C = fig4()
    U0 = C["U0"]
    AB = U0.piece((0, 1))
    assert AB == U0.set_named("A") & U0.set_named("B")
    assert sorted(X.cells[c].dim for c in AB) == [0, 0, 1]


def test_refinement_identity_and_fig4():
    X, C = fig4()
    U0, U1 = C["U0"], C["U1"]
    assert find_refinement(U0, U0).named() == {"A": "A", "B": "B", "C": "C"}
    assert find_refinement(U0, U1).named() == {"A": "A", "B": "BC", "C": "BC"}
    with pytest.raises(CoverError, match="BC"):
        find_refinement(U1, U0)
    assert refines(U0, C["U2"]) and not refines(C["U2"], U0)


def test_refinement_image_signs():
    X, C = fig4()
    rho = find_refinement(C["U0"], C["U1"])
    assert rho.image((0, 1)) == ((0, 1), 1)
    assert rho.image((1, 2)) is None


def test_common_refinement_segment():
    K = build_simplicial([([i, i + 1], 0) for i in range(4)])
    seg = lambda a, b: K.closure([K.find((i, i + 1)) for i in range(a, b)])
    U = Cover(K, {"L": seg(0, 2), "R": seg(2, 4)})
    V = Cover(K, {"l": seg(0, 1), "r": seg(1, 4)})
    W = common_refinement(U, V)
    assert W.names == ["L&l", "L&r", "R&r"]
    assert refines(W, U) and refines(W, V)


def test_common_refinement_prune():
    X, C = fig4()
    W = common_refinement(C["U0"], C["U2"], prune=True)
    assert len(W) == 3
    W2 = common_refinement(C["U0"], C["U0"], prune=True)
    assert sorted(W2.names) == ["A&A", "B&B", "C&C"]


def test_interpolation_examples():
    X, C = fig4()
    U0, U2 = C["U0"], C["U2"]
    assert interpolation(U0, U2, 0).names == ["A", "B", "C", "U[X]"]
    I1 = interpolation(U0, U0, 1)
    assert I1.names == ["A", "B", "C", "U[A,B]", "U[B,C]"]
    assert I1.sets[3] == U0.piece((0, 1))
    assert interpolation(U0, U0, nerve_extent(U0)).names == U0.names
    with pytest.raises(CoverError):
        interpolation(U2, U0, 0)


def test_adjoin_whole():
    X, C = fig4()
    U = adjoin_whole(C["U0"])
    assert U.names[-1] == "X" and len(U.sets[-1]) == len(X)


@given(st.integers(0, 2 ** 32 - 1))
def test_random_refinement_pairs(seed):
    rng = np.random.default_rng(seed)
    K = G.random_complex(rng)
    pair = G.random_refinement_pair(rng, K)
    U, V = pair
    rho = find_refinement(V, U)
    for i, j in enumerate(rho.assign):
        assert V.sets[i] <= U.sets[j]
    for r in all_refinements(V, U):
        assert all(V.sets[i] <= U.sets[j] for i, j in enumerate(r.assign))
    W = common_refinement(U, V, prune=True)
    assert refines(W, U) and refines(W, V)


@given(st.integers(0, 2 ** 32 - 1))
def test_nerve_is_closed_and_born_with_pieces(seed):
    rng = np.random.default_rng(seed)
    K = G.random_complex(rng)
    U = G.random_cover(rng, K)
    simp = set(U.nerve_simplices())
    for s in simp:
        assert U.piece(s)
        for i in range(len(s)):
            if len(s) > 1:
                assert s[:i] + s[i + 1:] in simp
    N = U.nerve()
    for c in N.cells:
        assert c.birth == U.piece_birth(tuple(c.label))
