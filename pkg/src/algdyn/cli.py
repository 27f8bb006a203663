"""Command-line front end.

Every subcommand accepts ``--json`` (machine-readable stdout), ``--out DIR``
(artifact directory, default ``$ALGDYN_OUTPUT_DIR`` or the current
directory) and ``--threads``. Domain errors exit with status 1 and a
structured error object; usage errors exit with status 2.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AlgDynError
from .group_ring import (
    content,
    divides,
    exact_quotient,
    involution,
    is_lopsided,
    is_primitive,
    is_well_balanced,
    norm,
    primitive_part,
)
from .polyio import format_expression, read_poly, to_json_obj

OUTPUT_ENV = "ALGDYN_OUTPUT_DIR"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


class Context:
    def __init__(self, args):
        self.json = args.json
        out = args.out or os.environ.get(OUTPUT_ENV) or "."
        self.out = Path(out)
        self.threads = args.threads or os.cpu_count() or 1
        self.written = []

    def write(self, name: str, text: str) -> str:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.written.append(str(path))
        return str(path)

    def emit(self, obj: dict):
        if self.written:
            obj = dict(obj, artifacts=self.written)
        if self.json:
            print(_dump(obj))
        else:
            _print_table(obj)


def _print_table(obj, indent=0):
    pad = "  " * indent
    for k in sorted(obj):
        v = obj[k]
        if isinstance(v, dict):
            print(f"{pad}{k}:")
            _print_table(v, indent + 1)
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            print(f"{pad}{k}:")
            for item in v:
                print(f"{pad}  -")
                _print_table(item, indent + 2)
        else:
            print(f"{pad}{k}: {_jsonable(v)}")


def _poly(args, name="poly"):
    return read_poly(getattr(args, name), getattr(args, "dim", None))


# --- subcommands ----------------------------------------------------------------

def cmd_ring(args, ctx):
    f = _poly(args)
    info = {"poly": format_expression(f), "json": to_json_obj(f), "dim": f.dim}
    if args.op == "info":
        info.update(
            l1_norm=str(norm(f, 1)) if not f.is_zero() else "0",
            linf_norm=str(norm(f, math.inf)) if not f.is_zero() else "0",
            involution=format_expression(involution(f)),
        )
        if not f.is_zero():
            info.update(
                content=content(f),
                primitive=is_primitive(f),
                lopsided=is_lopsided(f),
                well_balanced=is_well_balanced(f),
            )
        ctx.emit(info)
        return 0
    g = read_poly(args.other, f.dim) if args.other else None
    if args.op in ("mul", "add", "sub", "divides", "quotient") and g is None:
        raise AlgDynError(f"operation {args.op} needs --other")
    if args.op == "mul":
        res = f * g
    elif args.op == "add":
        res = f + g
    elif args.op == "sub":
        res = f - g
    elif args.op == "involution":
        res = involution(f)
    elif args.op == "primitive":
        res = primitive_part(f)
    elif args.op == "divides":
        ctx.emit({"divisor": format_expression(f), "dividend": format_expression(g), "divides": divides(f, g)})
        return 0
    else:  # quotient
        q = exact_quotient(f, g)
        ctx.emit({"divisor": format_expression(f), "dividend": format_expression(g),
                  "quotient": None if q is None else format_expression(q)})
        return 0
    ctx.emit({"result": format_expression(res), "json": to_json_obj(res)})
    return 0


def _invert(f, args):
    from . import inverse_engine as ie

    method = args.method
    if method == "lopsided":
        return ie.invert_lopsided(f, args.tol, args.radius)
    if method == "spectral":
        return ie.invert_spectral(f, args.radius, args.grid)
    if method == "green":
        return ie.green_function(f, args.radius, args.K, args.eps, args.batch)
    if method == "bessel":
        return ie.green_function_bessel(f, args.radius)
    if method == "experimental":
        return ie.experimental_summation(f, args.radius)
    return ie.best_inverse(f, args.radius, allow_experimental=args.allow_experimental, tol=args.tol)


def _cert_summary(w):
    cert = dict(w.certificate)
    return {
        "method": cert.get("method"),
        "radius": w.radius,
        "residual_inf": cert.get("residual_inf"),
        "tail_l1_bound": w.tail_l1_bound,
        "steps": cert.get("steps"),
        "certificate": cert,
    }


def cmd_invert(args, ctx):
    f = _poly(args)
    w = _invert(f, args)
    ctx.write("omega.csv", w.to_csv())
    summary = _cert_summary(w)
    ctx.write("omega_certificate.json", _dump(summary) + "\n")
    ctx.emit(summary)
    return 0


def cmd_green(args, ctx):
    args.method = "bessel" if args.bessel else "green"
    return cmd_invert(args, ctx)


def cmd_zeroset(args, ctx):
    from .spectral import zero_scan

    f = _poly(args)
    rep = zero_scan(f, args.grid, args.refine_iters, irreducible_asserted=args.assert_irreducible)
    obj = rep.to_json_obj()
    obj["poly"] = format_expression(f)
    ctx.write("zeroset.json", _dump(obj) + "\n")
    if args.cloud and rep.sample_cloud is not None:
        header = ",".join(f"t_{i + 1}" for i in range(f.dim))
        rows = [",".join(repr(float(v)) for v in p) for p in rep.sample_cloud]
        ctx.write("zeroset_cloud.csv", header + "\n" + "\n".join(rows) + "\n")
    ctx.emit(obj)
    return 0


def cmd_homoclinic(args, ctx):
    from .torus_model import decay_profile, fundamental_homoclinic_checked, membership_defect

    f = _poly(args)
    args.tol = 1e-12
    w = _invert(f, args)
    res = fundamental_homoclinic_checked(w)
    x = res.configuration
    prof = decay_profile(x)
    ctx.write("xdelta.csv", x.to_csv())
    ctx.write("decay_profile.csv", prof.to_csv())
    obj = {
        "poly": format_expression(f),
        "radius": x.radius,
        "omega": _cert_summary(w),
        "omega_certified": res.certified,
        "warning": res.warning,
        "membership_defect": membership_defect(x, f),
        "decaying": prof.decaying,
        "decay_rate": prof.rate,
    }
    ctx.emit(obj)
    return 0


def cmd_goe(args, ctx):
    from .goe_harness import AffineEndomorphism, goe_verdict

    f = _poly(args)
    r = read_poly(args.endo, f.dim)
    t = Fraction(args.translation) if args.translation is not None else None
    omega = None
    if args.omega_method != "auto":
        args.method = args.omega_method
        args.tol = 1e-12
        args.radius = args.radius or 12
        args.allow_experimental = args.assert_weakly_expansive
        omega = _invert(f, args)
    v = goe_verdict(
        AffineEndomorphism(r, t),
        f,
        irreducible_asserted=args.assert_irreducible,
        assert_weakly_expansive=args.assert_weakly_expansive,
        radius=args.radius,
        omega=omega,
        samples=args.samples,
        seed=args.seed,
    )
    obj = v.to_json_obj()
    obj["poly"] = format_expression(f)
    obj["endo"] = format_expression(r)
    if v.kernel_witness is not None:
        obj["kernel_witness"]["csv"] = ctx.write("kernel_witness.csv", v.kernel_witness.configuration.to_csv())
    ctx.write("verdict.json", _dump(obj) + "\n")
    ctx.emit(obj)
    return 0


def cmd_fixtures(args, ctx):
    from .goe_harness import fixture_shift_doubling, fixture_trivial_homoclinic

    a = fixture_shift_doubling()
    b = fixture_trivial_homoclinic()
    obj = {
        "shift_doubling": {
            "passed": a.passed,
            "surjective": a.surjective,
            "pre_injective": a.pre_injective,
            "witness_image_zero": a.image_is_zero,
            "witness_decaying": a.witness_decaying,
            "weakly_expansive": a.weakly_expansive,
        },
        "trivial_homoclinic": {
            "passed": b.passed,
            "root_pattern": {"on": b.on_circle, "inside": b.inside, "outside": b.outside},
            "zero_scan": b.zero_scan_classification,
            "refused": b.refused,
            "refusal_reason": b.refusal_reason,
        },
    }
    ctx.emit(obj)
    return 0 if a.passed and b.passed else 1


def _selftest_tasks():
    from .polyio import parse_expression as P

    def algebra():
        from .goe_harness import random_element

        rng = np.random.default_rng(1)
        for _ in range(100):
            d = int(rng.integers(1, 3))
            a, b, c = (random_element(rng, d) for _ in range(3))
            assert (a * b) * c == a * (b * c)
            assert a * b == b * a
            assert involution(a * b) == involution(a) * involution(b)
            if not a.is_zero():
                assert divides(a, a * b)
        return "100 random triples"

    def zeros():
        from .spectral import zero_scan

        assert zero_scan(P("u1^2 - u1 - 1"), 64).classification == "EMPTY"
        rep = zero_scan(P("1 + u1 + u2"), 128)
        assert rep.classification == "FINITE" and len(rep.points) == 2
        return "catalog subset"

    def inverses():
        from .inverse_engine import invert_lopsided, invert_spectral

        w = invert_lopsided(P("3 - u"), 1e-12)
        assert abs(w[(0,)] - 1 / 3) < 1e-12
        s = invert_spectral(P("u^2 - u - 1"), 20)
        assert s.certificate["residual_inf"] < 1e-9
        return "lopsided + spectral"

    def theorem():
        from .goe_harness import randomized_theorem_check

        s = randomized_theorem_check([P("u^2 - u - 1"), (P("2 - u1 - u2"), True)], 100, seed=3)
        assert s.violations == 0
        return f"{s.trials} trials, {s.negatives} negative"

    def fixtures():
        from .goe_harness import fixture_shift_doubling, fixture_trivial_homoclinic

        assert fixture_shift_doubling().passed and fixture_trivial_homoclinic().passed
        return "both fixtures"

    return [("algebra", algebra), ("zero_scan", zeros), ("inverses", inverses),
            ("theorem_check", theorem), ("fixtures", fixtures)]


def cmd_selftest(args, ctx):
    def run(task):
        name, fn = task
        t0 = time.perf_counter()
        try:
            detail = fn()
            ok = True
        except Exception as exc:  # report every failure, keep going
            detail, ok = f"{type(exc).__name__}: {exc}", False
        return {"name": name, "passed": ok, "detail": detail, "seconds": round(time.perf_counter() - t0, 2)}

    with ThreadPoolExecutor(max_workers=ctx.threads) as pool:
        results = list(pool.map(run, _selftest_tasks()))
    if not ctx.json:
        for r in results:
            print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: {r['detail']}")
        return 0 if all(r["passed"] for r in results) else 1
    ctx.emit({"results": [dict(r, seconds=None) for r in results]})
    return 0 if all(r["passed"] for r in results) else 1


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")
    common.add_argument("--out", help=f"artifact directory (default ${OUTPUT_ENV} or .)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")

    poly = argparse.ArgumentParser(add_help=False)
    poly.add_argument("--poly", required=True, help="JSON file, JSON string or expression like '4 - u1 - u1^-1'")
    poly.add_argument("--dim", type=int, default=None, help="dimension when the expression does not show it")

    inv = argparse.ArgumentParser(add_help=False)
    inv.add_argument("--radius", type=int, default=20)
    inv.add_argument("--tol", type=float, default=1e-12)
    inv.add_argument("--grid", type=int, default=None, help="spectral grid N (power of two)")
    inv.add_argument("--K", type=int, default=4000, help="max walk steps (green)")
    inv.add_argument("--eps", type=float, default=5e-5, help="stopping increment (green)")
    inv.add_argument("--batch", type=int, default=50)
    inv.add_argument("--allow-experimental", action="store_true")

    p = argparse.ArgumentParser(prog="algdyn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ring", parents=[common, poly], help="group-ring arithmetic")
    s.add_argument("--op", default="info",
                   choices=["info", "mul", "add", "sub", "involution", "primitive", "divides", "quotient"])
    s.add_argument("--other", help="second operand")
    s.set_defaults(func=cmd_ring)

    s = sub.add_parser("invert", parents=[common, poly, inv], help="convolution inverse omega")
    s.add_argument("--method", default="auto",
                   choices=["auto", "lopsided", "spectral", "green", "bessel", "experimental"])
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("green", parents=[common, poly, inv], help="Green function of a well-balanced f")
    s.add_argument("--bessel", action="store_true", help="continuous-time quadrature (axis-separable f)")
    s.set_defaults(func=cmd_green)

    s = sub.add_parser("zeroset", parents=[common, poly], help="scan and classify Z(f)")
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--refine-iters", type=int, default=80)
    s.add_argument("--cloud", action="store_true", help="also write the zero cloud as CSV")
    s.add_argument("--assert-irreducible", action="store_true")
    s.set_defaults(func=cmd_zeroset)

    s = sub.add_parser("homoclinic", parents=[common, poly, inv], help="fundamental homoclinic point")
    s.add_argument("--method", default="auto",
                   choices=["auto", "lopsided", "spectral", "green", "bessel", "experimental"])
    s.set_defaults(func=cmd_homoclinic)

    s = sub.add_parser("goe", help="surjectivity / pre-injectivity verdicts")
    gsub = s.add_subparsers(dest="goe_command", required=True)
    g = gsub.add_parser("check", parents=[common, poly, inv])
    g.add_argument("--endo", required=True, help="linear part r (same formats as --poly)")
    g.add_argument("--translation", default=None, help="constant translational part, e.g. 1/2")
    g.add_argument("--assert-irreducible", action="store_true")
    g.add_argument("--assert-weakly-expansive", action="store_true")
    g.add_argument("--omega-method", default="auto",
                   choices=["auto", "lopsided", "spectral", "green", "bessel", "experimental"])
    g.add_argument("--samples", type=int, default=50)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_goe, radius=None)

    s = sub.add_parser("fixtures", parents=[common], help="counterexample regressions")
    s.set_defaults(func=cmd_fixtures)

    s = sub.add_parser("selftest", parents=[common], help="reduced-scale invariant suites")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    ctx = Context(args)
    try:
        return args.func(args, ctx)
    except AlgDynError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "state", None):
            err["state"] = exc.state
        if ctx.json:
            print(_dump(err))
        else:
            print(f"error: {err['error']}: {err['message']}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
