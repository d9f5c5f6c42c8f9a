import numpy as np
import pytest
from hypothesis import given, strategies as st

import gen as G
import oracles as O
from mvss.carriers import (Carrier, CarrierError, EquivalencePack, check_acyclic, check_semicontinuous,
                           closure_carrier, compose, cone, contained, identity_pack, lattice_carrier,
                           reduced_homology, synthesize_chain_map, synthesize_homotopy, verify_equivalence,
                           vr_carrier)
from mvss.complex import FiltrationGrid, build_simplicial
from mvss.fixtures import fig4, vr_circle
from mvss.persistence import homology_module
from mvss import linalg

CIRCLE = [([0, 1], 0), ([1, 2], 0), ([0, 2], 0)]


def _vertex(K, v):
    return K.find((v,))


def test_reduced_homology():
    K = build_simplicial(CIRCLE)
    assert reduced_homology(K, range(len(K))) == [0, 1]
    assert reduced_homology(K, [_vertex(K, 0)]) == [0]
    assert reduced_homology(K, [_vertex(K, 0), _vertex(K, 1)]) == [1]
    assert reduced_homology(K, []) is None


def test_constant_vertex_carrier_is_acyclic():
    X, _ = fig4()
    Y = build_simplicial([([0], 0)], grid=X.grid)
    F = Carrier(X, Y, {c.id: [0] for c in X.cells})
    assert check_acyclic(F).ok
    f = synthesize_chain_map(F)
    assert not f.chain_map_failures()
    assert f.matrix[0, [c.id for c in X.cells if c.dim == 0]].tolist() == [1] * 8
    assert not f.matrix[:, [c.id for c in X.cells if c.dim > 0]].any()


def test_circle_carrier_fails_in_degree_one():
    X = build_simplicial([([0], 0)])
    Y = build_simplicial(CIRCLE)
    rep = check_acyclic(Carrier(X, Y, {0: range(len(Y))}))
    assert not rep.ok and rep.failure["degree"] == 1


def test_fig4_overlap_carrier():
    X, C = fig4()
    AB = C["U0"].piece((0, 1))
    sub, new_of, old = X.subcomplex(AB)
    late = Carrier(sub, X, {c.id: AB for c in sub.cells}, 1.0)
    assert check_acyclic(late).ok
    early = Carrier(sub, X, {c.id: AB for c in sub.cells}, 0.0)
    rep = check_acyclic(early)
    assert not rep.ok and rep.failure["degree"] == 0 and rep.failure["t"] == 0


def test_compose_with_identity():
    X, _ = fig4()
    F = closure_carrier(X, 1.0)
    I = closure_carrier(X)
    GF, FI = compose(F, I), compose(I, F)
    for c in X.cells:
        for t in range(c.birth, 4):
            assert GF.at(c.id, t) == F.at(c.id, t) == FI.at(c.id, t)
    assert GF.shift == 1.0


def test_compose_of_segments_can_be_a_circle():
    Y = build_simplicial(CIRCLE)
    X = build_simplicial([([0], 0), ([1], 0), ([0, 1], 0)])
    e = lambda a, b: Y.find((a, b))
    F = Carrier(X, X, {0: [0], 1: [1], 2: [2]})
    G = Carrier(X, Y, {X.find((0,)): [e(0, 1), e(0, 2)], X.find((1,)): [e(0, 1), e(1, 2)],
                       X.find((0, 1)): [e(0, 1), e(0, 2)]})
    assert check_acyclic(G).ok
    P = build_simplicial([([0], 0)])
    H = Carrier(P, X, {0: [X.find((0, 1))]})
    assert check_acyclic(H).ok
    rep = check_acyclic(compose(H, G))
    assert not rep.ok and rep.failure["degree"] == 1
    assert check_semicontinuous(G)


def test_semicontinuity_of_closure_carriers():
    X, _ = fig4()
    assert check_semicontinuous(closure_carrier(X, 1.0)) == []


def test_identity_synthesis():
    X, _ = fig4()
    F = closure_carrier(X)
    f = synthesize_chain_map(F)
    assert np.array_equal(f.matrix, np.eye(len(X), dtype=np.int64))
    assert not f.chain_map_failures() and not f.carried_failures(F)


def test_shift_synthesis_induces_inclusion_ranks():
    X, _ = fig4()
    F = closure_carrier(X, 1.0)
    f = synthesize_chain_map(F)
    for k in range(2):
        H = homology_module(X, k)
        rk = f.rank_function(k)
        for s in range(4):
            for t in range(f.targets[s], 4):
                assert rk[s, t] == (linalg.rank(H.map(s, t), 2) if H.map(s, t).size else 0)


def test_homotopy_examples():
    X, _ = fig4()
    F = closure_carrier(X, 1.0)
    f = synthesize_chain_map(F)
    h = synthesize_homotopy(F, f, f)
    assert not h.failures() and not h.matrix.any()
    W = Carrier(X, X, {c.id: range(len(X)) for c in X.cells}, 3.0)
    a, b = synthesize_chain_map(W), synthesize_chain_map(W, "last", seed=1)
    assert not np.array_equal(a.matrix, b.matrix)
    assert not synthesize_homotopy(W, a, b).failures()


def test_homotopy_into_cone():
    X, _ = fig4()
    K = build_simplicial(CIRCLE, grid=X.grid)
    Cn, apex = cone(K)
    F = Carrier(X, Cn, {c.id: range(len(Cn)) for c in X.cells})
    f, g = synthesize_chain_map(F), synthesize_chain_map(F, "random", seed=3)
    assert not synthesize_homotopy(F, f, g).failures()


def test_cone_construction():
    K = build_simplicial(CIRCLE)
    Cn, apex = cone(K)
    assert apex == 3 and Cn.counts() == [4, 6, 3]
    assert reduced_homology(Cn, range(len(Cn))) == [0, 0, 0]


def test_vr_same_cloud():
    P = vr_circle(8)
    pack = vr_carrier(P, P)
    assert pack.eps == 0
    for c in pack.F.source.cells:
        assert pack.F.at(c.id, c.birth) == frozenset(pack.F.source.closure([c.id]))
    assert verify_equivalence(pack).ok


def test_vr_two_points_on_a_line():
    pack = vr_carrier(np.array([[0.0]]), np.array([[0.4]]), 1)
    assert pack.eps == pytest.approx(0.8)
    assert pack.F.at(0, 0) == frozenset([0])
    assert verify_equivalence(pack).ok


def test_vr_noisy_circles():
    P, Q = vr_circle(20, 0.05, seed=1), vr_circle(20, 0.05, seed=2)
    pack = vr_carrier(P, Q, 2)
    assert pack.eps == pytest.approx(2 * O.hausdorff(P, Q), abs=1e-12)
    cert = verify_equivalence(pack)
    assert cert.ok and cert.bottleneck[1] <= pack.eps
    assert not contained(compose(pack.F, pack.G), pack.IX)


@pytest.mark.parametrize("f,r,l,eps", [
    (lambda x: float(x[0]), [1.0], [0.0], 0.0),
    (lambda x: float(x[0]), [0.5], [0.25], 0.75),
    (lambda x: float(max(x)), [0.5, 1.0], [0.25, 0.0], 0.75),
])
def test_lattice_examples(f, r, l, eps):
    pack = lattice_carrier(f, r, l, W=2.0)
    assert pack.eps == pytest.approx(eps)
    cert = verify_equivalence(pack, len(r) - 1)
    assert cert.ok
    assert all(d <= pack.eps + 1e-12 for d in cert.bottleneck.values())


def test_identity_pack():
    X, _ = fig4()
    cert = verify_equivalence(identity_pack(X))
    assert cert.ok and cert.eps == 0 and cert.bottleneck == {0: 0.0, 1: 0.0}


def test_sabotaged_pack_names_the_failure():
    pack = vr_carrier(vr_circle(8), vr_circle(8, 0.1, seed=4), 2)
    X, Y = pack.F.source, pack.F.target
    # every cell of X sent to the first vertex of Y: still acyclic, but G o F leaves I_X
    F = Carrier(X, Y, {c.id: [0] for c in X.cells}, pack.eps)
    bad = EquivalencePack(F, pack.G, pack.IX, pack.IY, pack.eps)
    cert = verify_equivalence(bad)
    assert not cert.ok and cert.failures[0]["check"] == "G o F in I_X"
    assert cert.checks["G o F in I_X"] is False


def test_empty_carrier_raises():
    X, _ = fig4()
    F = Carrier(X, X, {})
    assert not check_acyclic(F).ok
    with pytest.raises(CarrierError):
        synthesize_chain_map(F)


@given(st.integers(0, 2 ** 32 - 1))
def test_random_cone_carriers(seed):
    rng = np.random.default_rng(seed)
    X = G.random_complex(rng, max_cells=20, grid_size=3)
    K = G.random_complex(rng, max_cells=15, grid_size=3, max_dim=2)
    Cn, apex = cone(K)
    lab = Cn.label_index()
    A = {c.label[0]: [K.cells[int(i)].label for i in rng.choice(len(K), 2)] for c in X.cells if c.dim == 0}
    F = Carrier(X, Cn, {c.id: [lab[tuple(s) + (apex,)] for v in c.label for s in A[v]] for c in X.cells})
    assert check_acyclic(F).ok
    f, g = synthesize_chain_map(F), synthesize_chain_map(F, "random", seed=seed)
    assert not f.chain_map_failures() and not f.carried_failures(F)
    assert not g.chain_map_failures() and not g.carried_failures(F)
    assert not synthesize_homotopy(F, f, g).failures()
    assert np.array_equal(f.rank_function(1), g.rank_function(1))
