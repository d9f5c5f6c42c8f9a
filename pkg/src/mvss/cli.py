"""Command-line interface: ``mvss <command> [options]``.

Exit codes: 0 ok, 2 input error, 3 invariant violation, 4 hypothesis failure.
Every command prints one JSON document (sorted keys) to stdout or --output.
"""
import argparse
import os
import sys

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_HYPOTHESIS = 0, 2, 3, 4


class InvariantViolation(RuntimeError):
    pass


def _threads_default():
    try:
        return max(1, int(os.environ.get("MVSS_THREADS", "1")))
    except ValueError:
        return 1


def _limit_threads(n):
    # BLAS pools read these at first use; set them before numpy is imported
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def _load(args):
    from . import io
    K = io.parse_complex(args.complex)
    if args.field is not None and args.field != K.field:
        K = K.with_field(args.field)
    return K


def _cover(path, K):
    from . import io
    return io.parse_cover(path, K)


def _barcodes(K, maxdim):
    from .io import barcode_json
    from .persistence import compute_ph
    return [barcode_json(b) for b in compute_ph(K, maxdim)]


def cmd_ph(args):
    K = _load(args)
    return {"barcodes": _barcodes(K, args.maxdim)}


def cmd_nerve(args):
    from .io import complex_to_json
    K = _load(args)
    U = _cover(args.cover, K)
    N = U.nerve()
    return {"names": U.names, "nerve": complex_to_json(N), "barcodes": _barcodes(N, args.maxdim)}


def cmd_blowup(args):
    from .diagrams import cover_diagram, realization, total_complex_check
    K = _load(args)
    U = _cover(args.cover, K)
    D = cover_diagram(K, U)
    B = realization(D)
    tc = total_complex_check(D)
    bx, bb = _barcodes(K, args.maxdim), _barcodes(B.complex, args.maxdim)
    out = {"realization": B.to_json(), "barcodes": bb, "matches_complex": bx == bb,
           "total_complex_ok": tc["ok"]}
    if not tc["ok"] or bx != bb:
        raise InvariantViolation(("realization barcodes differ from the complex" if bx != bb
                                  else "total complex check failed"), out)
    return out


def _pages(spec, stable):
    if spec is None:
        return list(range(0, stable + 1))
    if ":" in spec:
        a, b = spec.split(":")
        return list(range(int(a), int(b) + 1))
    return [int(spec)]


def cmd_ss(args):
    from .io import pages_json
    from .serre import cover_ss
    K = _load(args)
    U = _cover(args.cover, K)
    css = cover_ss(K, U)
    out = pages_json(css.ss, _pages(args.page, css.ss.stable_page), args.differentials)
    out["names"] = U.names
    return out


def cmd_join(args):
    from .diagrams import join_diagram, realization
    K = _load(args)
    blocks = [[int(v) for v in b.split(",") if v.strip()] for b in args.partition.split(";")]
    D = join_diagram(K, blocks)
    B = realization(D)
    bx, bb = _barcodes(K, args.maxdim), _barcodes(B.complex, args.maxdim)
    out = {"partition": blocks, "realization_cells": len(B), "barcodes": bb, "matches_complex": bx == bb}
    if bx != bb:
        raise InvariantViolation("join realization barcodes differ from the complex", out)
    return out


def cmd_carrier_verify(args):
    from . import carriers, io
    if args.points_x and args.points_y:
        pack = carriers.vr_carrier(io.parse_points(args.points_x), io.parse_points(args.points_y),
                                   max_dim=args.maxdim + 1)
    elif args.lattice:
        import numpy as np
        r = [float(v) for v in args.lattice_r.split(",")]
        l = [float(v) for v in args.lattice_l.split(",")]
        kind = args.lattice

        def f(x):
            return float(np.max(x)) if kind == "max" else float(np.sum(x))

        pack = carriers.lattice_carrier(f, r, l, args.window)
    else:
        raise ValueError("give --points-x/--points-y or --lattice")
    cert = carriers.verify_equivalence(pack, args.maxdim)
    out = cert.to_json()
    out["meta"] = {k: v for k, v in pack.meta.items() if k == "hausdorff"}
    if not cert.ok:
        raise InvariantViolation("equivalence not certified", out)
    return out


def cmd_compare_refine(args):
    from .serre import inverse_refinement, theta
    K = _load(args)
    U, V = _cover(args.cover_u, K), _cover(args.cover_v, K)
    th = theta(K, U, V)
    rep = inverse_refinement(K, U, V, args.eps, args.nu)
    rep["theta_equals_refinement"] = th.equals_refinement()
    if not rep["theta_equals_refinement"]:
        raise InvariantViolation("theta differs from the refinement morphism", rep)
    return rep


def cmd_local_checks(args):
    from .serre import local_checks
    K = _load(args)
    W, U = _cover(args.cover_w, K), _cover(args.cover_u, K)
    return local_checks(K, W, U)


def cmd_cover_stability(args):
    from .serre import cover_stability
    K = _load(args)
    U, V = _cover(args.cover_u, K), _cover(args.cover_v, K)
    return cover_stability(K, U, V)


def cmd_fixtures(args):
    from . import fixtures, io
    os.makedirs(args.out, exist_ok=True)
    written = []

    def put(name, obj):
        path = os.path.join(args.out, name)
        io.write_json(obj, path)
        written.append(name)

    if args.name == "fig4":
        X, covers = fixtures.fig4(args.field or 2)
        put("fig4.json", io.complex_to_json(X))
        for n in ("U0", "U1", "U2", "U", "V"):
            put(f"fig4_{n}.json", io.cover_to_json(covers[n]))
    elif args.name == "fig6_eps":
        X, covers = fixtures.fig6_eps(args.eps, args.field or 2)
        put("fig6.json", io.complex_to_json(X))
        for n in ("V", "U"):
            put(f"fig6_{n}.json", io.cover_to_json(covers[n]))
    elif args.name in ("seven_simplex_join", "fig2_join"):
        K, P = getattr(fixtures, args.name)(args.field or 2)
        put(f"{args.name}.json", io.complex_to_json(K))
        put(f"{args.name}_partition.json", {"blocks": P})
    elif args.name == "vr_circle":
        P = fixtures.vr_circle(args.n, args.jitter, seed=args.seed)
        io.write_points(P, os.path.join(args.out, "vr_circle.csv"))
        written.append("vr_circle.csv")
    return {"fixture": args.name, "files": written}


def build_parser():
    ap = argparse.ArgumentParser(prog="mvss", description="Persistent Mayer-Vietoris spectral sequences.")
    ap.add_argument("--threads", type=int, default=_threads_default(),
                    help="worker threads (default: $MVSS_THREADS or 1)")
    ap.add_argument("--output", "-o", default=None, help="write JSON here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, needs_complex=True, maxdim=1):
        p = sub.add_parser(name)
        if needs_complex:
            p.add_argument("--complex", required=True)
        p.add_argument("--field", type=int, default=None)
        p.add_argument("--maxdim", type=int, default=maxdim)
        p.set_defaults(fn=fn)
        return p

    cmd("ph", cmd_ph)
    cmd("nerve", cmd_nerve).add_argument("--cover", required=True)
    cmd("blowup", cmd_blowup).add_argument("--cover", required=True)
    p = cmd("ss", cmd_ss)
    p.add_argument("--cover", required=True)
    p.add_argument("--page", default=None, help="page r or range a:b (default: all up to stable)")
    p.add_argument("--differentials", action="store_true")
    p = cmd("join", cmd_join)
    p.add_argument("--partition", required=True, help="blocks as '0,1,2;3,4'")
    p = cmd("carrier-verify", cmd_carrier_verify, needs_complex=False)
    p.add_argument("--points-x")
    p.add_argument("--points-y")
    p.add_argument("--lattice", choices=["sum", "max"], help="generate the lattice family for f = sum or max")
    p.add_argument("--lattice-r", default="0.5")
    p.add_argument("--lattice-l", default="0.25")
    p.add_argument("--window", type=float, default=2.0)
    p = cmd("compare-refine", cmd_compare_refine)
    p.add_argument("--cover-u", required=True)
    p.add_argument("--cover-v", required=True, help="the refining cover")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p = cmd("local-checks", cmd_local_checks)
    p.add_argument("--cover-w", required=True, help="the refining cover")
    p.add_argument("--cover-u", required=True)
    p = cmd("cover-stability", cmd_cover_stability)
    p.add_argument("--cover-u", required=True)
    p.add_argument("--cover-v", required=True)
    p = cmd("fixtures", cmd_fixtures, needs_complex=False)
    p.add_argument("--name", required=True,
                   choices=["fig4", "fig6_eps", "seven_simplex_join", "fig2_join", "vr_circle"])
    p.add_argument("--out", default=".")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    _limit_threads(args.threads)
    from . import io
    from .complex import ComplexError
    from .covers import CoverError
    from .diagrams import DiagramError
    from .serre import HypothesisError

    def emit(obj, code):
        text = io.write_json(obj, None)
        if args.output and code == EXIT_OK:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return code

    def error(kind, exc, code, detail=None):
        body = {"error": {"type": kind, "message": str(exc)}}
        if detail is not None:
            body["error"]["detail"] = detail
        return emit(body, code)

    try:
        out = args.fn(args)
    except HypothesisError as exc:
        return error("hypothesis", exc, EXIT_HYPOTHESIS)
    except InvariantViolation as exc:
        return error("invariant", exc.args[0], EXIT_INVARIANT, exc.args[1] if len(exc.args) > 1 else None)
    except DiagramError as exc:
        return error("invariant", exc, EXIT_INVARIANT)
    except (io.FormatError, ComplexError, CoverError, ValueError, OSError) as exc:
        # not-a-refinement is a hypothesis failure, everything else is bad input
        if isinstance(exc, CoverError) and "not a refinement" in str(exc):
            return error("hypothesis", exc, EXIT_HYPOTHESIS)
        return error("input", exc, EXIT_INPUT)
    out["threads"] = args.threads
    return emit(out, EXIT_OK)


if __name__ == "__main__":
    sys.exit(main())
