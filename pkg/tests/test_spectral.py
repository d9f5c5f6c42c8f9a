import numpy as np
from hypothesis import given, strategies as st

import gen as G
import oracles as O
from mvss.covers import whole
from mvss.diagrams import cover_diagram, join_diagram, realization
from mvss.fixtures import fig4, fig6_eps
from mvss.persistence import compute_ph
from mvss.spectral import (PageMorphism, check_page_interleaving, compute_pages, double_complex, e_infinity_check,
                           identity_page_morphism, zero_page_morphism)


def _u0():
    X, C = fig4()
    D = cover_diagram(X, C["U0"])
    return X, D, compute_pages(double_complex(D))


def test_single_fiber_collapses():
    X, _ = fig4()
    dc = double_complex(cover_diagram(X, whole(X)))
    assert not dc.dH.any()
    assert set(int(c) for c in dc.column) == {0}
    ss = compute_pages(dc)
    ph = compute_ph(X, 2)
    for q in range(3):
        assert ss.barcode(1, 0, q) == ph[q]
        assert ss.barcode(ss.stable_page, 0, q) == ph[q]
    assert e_infinity_check(ss, X)["ok"]


def test_fig4_entry_counts():
    _, D, _ = _u0()
    dims = double_complex(D).entry_dims(0)
    assert dims[(0, 0)] == 12 and dims[(1, 0)] == 4
    assert double_complex(D).identities() == {"dV o dV = 0": True, "dH o dH = 0": True, "dV dH + dH dV = 0": True}


def test_fig4_page2_dims():
    _, _, ss = _u0()
    assert ss.dims(2, 1, 0) == [1, 1, 0, 0]
    assert ss.dims(2, 0, 1) == [0, 0, 1, 0]
    assert not ss.check_recursion()


def test_fig4_e_infinity():
    _, D, ss = _u0()
    rep = e_infinity_check(ss, realization(D))
    assert rep["ok"] and [c["n"] for c in rep["checked"]][:2] == [0, 1]


def test_fig4_pages_against_oracle():
    _, D, ss = _u0()
    B = realization(D)
    for t in range(4):
        for r in (1, 2, 3):
            for n in range(3):
                for p, d in O.realization_pages(B, t, r, n).items():
                    assert ss.dim(r, p, n - p, t) == d


def test_identity_and_zero_morphisms():
    _, _, ss = _u0()
    idm, zero = identity_page_morphism(ss), zero_page_morphism(ss, ss)
    for r in (1, 2):
        for p, q in ss.bidegrees():
            for t in range(4):
                n = ss.dim(r, p, q, t)
                assert np.array_equal(idm.get(r, p, q, t), np.eye(n, dtype=np.int64))
                assert not zero.get(r, p, q, t).any()


def test_identity_interleaving_and_sabotage():
    _, _, ss = _u0()
    idm = identity_page_morphism(ss)
    assert check_page_interleaving(ss, ss, idm, idm, 0.0, 0).ok
    rep = check_page_interleaving(ss, ss, zero_page_morphism(ss, ss), idm, 0.0, 0)
    assert not rep.ok and "phi o psi" in rep.failures[0]
    # a single zeroed page-2 entry
    p, q = 1, 0
    mats = {(2, a, b, t): idm.get(2, a, b, t) for a, b in ss.bidegrees() for t in range(4)}
    mats[(2, p, q, 0)] = np.zeros_like(mats[(2, p, q, 0)])
    bad = PageMorphism(ss, ss, 0.0, 2, page_mats=mats)
    rep = check_page_interleaving(ss, ss, bad, identity_page_morphism(ss, 2), 0.0, 2)
    assert not rep.ok and "(1,0), index 0" in rep.failures[0]


def test_interleaving_rejects_large_shift():
    _, _, ss = _u0()
    shifted = PageMorphism(ss, ss, 1.0, 0, chain_maps=identity_page_morphism(ss).chain_maps)
    rep = check_page_interleaving(ss, ss, shifted, shifted, 0.5, 0)
    assert not rep.ok and "shift exceeds" in rep.failures[0]


def test_fig6_e_infinity():
    X, C = fig6_eps(0.5)
    for name in ("V", "U"):
        D = cover_diagram(X, C[name])
        assert e_infinity_check(compute_pages(double_complex(D)), realization(D))["ok"]


@given(st.integers(0, 2 ** 32 - 1))
def test_random_pages_against_oracle(seed):
    rng = np.random.default_rng(seed)
    K = G.random_complex(rng, max_cells=25, field=int(rng.choice([2, 3])))
    D = cover_diagram(K, G.random_cover(rng, K))
    ss = compute_pages(double_complex(D))
    B = realization(D)
    for t in range(len(K.grid)):
        for r in (1, 2, 3):
            for n in range(3):
                for p, d in O.realization_pages(B, t, r, n).items():
                    assert ss.dim(r, p, n - p, t) == d
    assert not ss.check_recursion()
    assert e_infinity_check(ss, B)["ok"]


@given(st.integers(0, 2 ** 32 - 1))
def test_random_join_e_infinity(seed):
    rng = np.random.default_rng(seed)
    K = G.random_complex(rng, vertices_at_zero=True)
    D = join_diagram(K, G.random_partition(rng, K))
    assert e_infinity_check(compute_pages(double_complex(D)), K)["ok"]
