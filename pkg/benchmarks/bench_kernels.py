"""Compare the compiled and pure-Python elimination kernels.

    python3 benchmarks/bench_kernels.py [--sizes 50,100,200] [--field 2] [--repeat 3]

Times rref and column reduction on random sparse matrices and on the
boundary matrices of a Vietoris-Rips complex, checks that both backends agree,
and prints one line per case.
"""
import argparse
import time

import numpy as np

from mvss import linalg
from mvss.complex import build_vietoris_rips
from mvss.fixtures import vr_circle


def _time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(sizes, p, seed=0):
    rng = np.random.default_rng(seed)
    for n in sizes:
        A = rng.integers(0, p, (n, n)) * (rng.random((n, n)) < 0.1)
        yield f"random {n}x{n}", A
    K = build_vietoris_rips(vr_circle(16, 0.1, seed=seed), 2, field=p)
    yield "vr16 boundary d2", K.boundary_matrix(2)


def run(sizes, p, repeat):
    has_cython = True
    try:
        linalg.use_backend("cython")
    except ImportError:
        has_cython = False
    print(f"{'case':<22}{'op':<10}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name, A in cases(sizes, p):
        for op, fn in (("rref", lambda: linalg.rref(A, p)), ("reduce", lambda: linalg.reduce_columns(A, p))):
            linalg.use_backend("python")
            tp, ref = _time(fn, repeat)
            if has_cython:
                linalg.use_backend("cython")
                tc, got = _time(fn, repeat)
                same = np.array_equal(ref[0], got[0]) and list(ref[1]) == list(got[1])
                flag = "" if same else "  MISMATCH"
                print(f"{name:<22}{op:<10}{tp:>12.4f}{tc:>12.4f}{tp / max(tc, 1e-9):>10.1f}{flag}")
            else:
                print(f"{name:<22}{op:<10}{tp:>12.4f}{'n/a':>12}{'':>10}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="50,100,200")
    ap.add_argument("--field", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    run([int(s) for s in a.sizes.split(",")], a.field, a.repeat)


if __name__ == "__main__":
    main()
