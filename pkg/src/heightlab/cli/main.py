"""``heightlab`` command-line interface.

Exit codes: 0 success, 2 invalid input, 3 precision exhausted, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

from heightlab.canonical.lattice import concrete_canonical, lattice_canonical, zf_membership
from heightlab.canonical.polarized import call_silverman, height_offset
from heightlab.canonical.series import DIGITS_BUDGET, height_series
from heightlab.canonical.wehler import nef_canonical_wehler
from heightlab.cli import render
from heightlab.cli.schema import format_point, load_file, parse_point
from heightlab.dynsys.lattice import ConcreteAbelianSystem, LatticeSystem
from heightlab.dynsys.p1 import P1Morphism
from heightlab.dynsys.picard import system_spectral
from heightlab.dynsys.wehler import WehlerSystem
from heightlab.errors import HeightLabError, InputError
from heightlab.numlin.balls import default_precision
from heightlab.orbits.intersect import gap_bound_check, orbit_intersection
from heightlab.orbits.records import detect_preperiodic, northcott_scan


def _bits(args) -> int:
    return args.precision_bits or default_precision()


def _emit(args, payload: dict, columns: Sequence[str] | None = None, rows: Sequence[dict] | None = None) -> None:
    text = render.dumps(payload)
    if getattr(args, "json", None):
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    csv_text = None
    if columns is not None and rows is not None:
        meta = {k: payload[k] for k in ("command", "label", "version") if k in payload}
        csv_text = render.table_csv(columns, rows, meta)
        if getattr(args, "csv", None):
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(csv_text)
    if args.output == "csv":
        if csv_text is None:
            raise InputError("this command has no tabular output; use --output json", "--output")
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(text)


def _map_points(args, fn: Callable, items: list) -> list:
    """Apply ``fn`` to each item, in parallel across processes when ``--jobs`` > 1."""
    if args.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# --- commands -------------------------------------------------------------

def cmd_spectral(args) -> None:
    L = load_file(args.system)
    ss = system_spectral(L.system, _bits(args))
    dom = []
    if ss.spectral is not None:
        dom = [{"poly": str(df.poly), "jordan_size": df.jordan_size, "profile": df.profile,
                "certification": df.certification} for df in ss.spectral.dominant_factors]
    body = {
        "delta": [render.decimal(ss.delta.lower, args.digits), render.decimal(ss.delta.upper, args.digits)],
        "delta_exact": render.exact(ss.delta_exact),
        "l": ss.l,
        "l_is_upper_bound": ss.l_upper_bound,
        "kind_tag": ss.tag,
        "certification": ss.certification,
        "dominant_factors": dom,
    }
    _emit(args, render.envelope("spectral", L.label, body))


def _series_rows(s, digits: int) -> list[dict]:
    rows = []
    for r in s.rows:
        rows.append({
            "n": r.n,
            "h_n": render.decimal(r.h.midpoint, digits),
            "h_n_radius": render.decimal(r.h.radius, 3),
            "h_n_exact": render.exact(r.h_exact),
            "a_n": None if r.a is None else render.decimal(r.a.midpoint, digits),
            "a_n_radius": None if r.a is None else render.decimal(r.a.radius, 3),
            "a_n_exact": render.exact(r.a_exact),
            "flags": "n0" if r.n == 0 else "",
        })
    return rows


SERIES_COLUMNS = ("n", "h_n", "h_n_radius", "h_n_exact", "a_n", "a_n_radius", "a_n_exact", "flags")


def cmd_series(args) -> None:
    L = load_file(args.system)
    x = parse_point(L, args.point[0])
    bits = _bits(args)
    s = height_series(L.system, x, args.steps, bits, args.budget)
    rows = _series_rows(s, args.digits)
    if s.truncation_reason != "converged" and rows:
        rows[-1]["flags"] = (rows[-1]["flags"] + " " + s.truncation_reason).strip()
    body = {
        "point": format_point(x),
        "delta": render.ball(s.delta, args.digits),
        "l": s.l,
        "truncation_reason": s.truncation_reason,
        "rows": rows,
    }
    _emit(args, render.envelope("series", L.label, body), SERIES_COLUMNS, rows)


def _estimate_dict(e, digits: int) -> dict:
    return {
        "mode": e.mode,
        "limsup": render.ball(e.limsup_est, digits),
        "liminf": render.ball(e.liminf_est, digits),
        "limsup_exact": render.exact(e.limsup_exact),
        "liminf_exact": render.exact(e.liminf_exact),
        "error_bound": None if e.error_bound is None else render.decimal(e.error_bound.upper, 6),
        "notes": list(e.notes),
    }


class _CanonicalJob:
    """Picklable per-point job for ``--jobs``."""

    def __init__(self, path: str, args):
        self.path = path
        self.tolerance = args.tolerance
        self.bits = _bits(args)
        self.steps = args.steps
        self.budget = args.budget
        self.digits = args.digits

    def __call__(self, text: str) -> dict:
        L = load_file(self.path)
        x = parse_point(L, text)
        S = L.system
        if isinstance(S, P1Morphism):
            e = call_silverman(S, x, self.tolerance, self.bits, self.budget)
            extra = {"height_offset_C0": render.decimal(height_offset(S, self.bits), 8)}
        elif isinstance(S, LatticeSystem):
            e = lattice_canonical(S, x, self.bits)
            extra = {}
        elif isinstance(S, ConcreteAbelianSystem):
            e = concrete_canonical(S, x, min(self.tolerance, 1e-8), self.bits)
            extra = {}
        elif isinstance(S, WehlerSystem):
            e = nef_canonical_wehler(S, x, self.steps, self.bits, self.budget)
            extra = {}
        else:
            s = height_series(S, x, self.steps, self.bits, self.budget)
            vals = s.a_values()[-max(1, len(s.a_values()) // 3):]
            from heightlab.canonical.estimate import EMPIRICAL, CanonicalEstimate
            from heightlab.numlin.balls import ball_max, ball_min

            e = CanonicalEstimate(ball_max(vals), ball_min(vals), EMPIRICAL, None, None, None,
                                  (f"extremes of the last {len(vals)} normalized terms",))
            extra = {}
        return {"point": format_point(x), **_estimate_dict(e, self.digits), **extra}


def cmd_canonical(args) -> None:
    L = load_file(args.system)
    for p in args.point:
        parse_point(L, p)
    results = _map_points(args, _CanonicalJob(args.system, args), list(args.point))
    rows = [{"point": r["point"], "mode": r["mode"], "lo": r["liminf"]["lo"], "hi": r["limsup"]["hi"],
             "exact": r["limsup_exact"] if r["limsup_exact"] == r["liminf_exact"] else None,
             "error_bound": r["error_bound"]} for r in results]
    body = {"tolerance": render.decimal(args.tolerance, 6), "results": results}
    _emit(args, render.envelope("canonical", L.label, body), ("point", "mode", "lo", "hi", "exact", "error_bound"), rows)


def cmd_zf(args) -> None:
    L = load_file(args.system)
    if not isinstance(L.system, LatticeSystem):
        raise InputError("height-zero membership is implemented for lattice systems", "$.kind")
    bits = _bits(args)
    results = []
    for p in args.point:
        v = parse_point(L, p)
        z = zf_membership(L.system, v, L.factor_hints, bits)
        results.append({
            "point": format_point(v),
            "member": z.member,
            "certification": z.certification,
            "kernel_basis": None if z.kernel_basis is None else [[str(c) for c in b] for b in z.kernel_basis],
            "fixed_point": None if z.fixed_point is None else [str(c) for c in z.fixed_point],
            "limit": None if z.limit is None else _estimate_dict(z.limit, args.digits),
            "flags": list(z.flags),
        })
    rows = [{"point": r["point"], "member": r["member"], "certification": r["certification"],
             "flags": " ".join(r["flags"])} for r in results]
    _emit(args, render.envelope("zf", L.label, {"results": results}), ("point", "member", "certification", "flags"), rows)


def cmd_scan(args) -> None:
    L = load_file(args.system)
    if not isinstance(L.system, P1Morphism):
        raise InputError("Northcott scans are implemented for maps of the projective line", "$.kind")
    r = northcott_scan(L.system, args.bound, args.tolerance, args.max_steps, _bits(args))
    pts = [format_point(P) for P in r.confirmed]
    body = {
        "bound": args.bound,
        "examined": r.examined,
        "threshold": render.decimal(r.threshold, 6),
        "preperiodic": pts,
        "anomalies": [format_point(P) for P in r.anomalies],
    }
    _emit(args, render.envelope("scan", L.label, body), ("point",), [{"point": p} for p in pts])


def cmd_intersect(args) -> None:
    F = load_file(args.system)
    G = load_file(args.system2) if args.system2 else F
    x = parse_point(F, args.x, "--x")
    y = parse_point(G, args.y, "--y")
    rep = orbit_intersection(F.system, x, G.system, y, args.steps, args.budget)
    body = {
        "x": format_point(x),
        "y": format_point(y),
        "N": args.steps,
        "computed": list(rep.computed),
        "truncated": rep.truncated,
        "pairs": [list(p) for p in rep.pairs],
        "max_gap": rep.max_gap,
        "ap_decomposition": [{"k": k, "i": i, "j": j} for k, i, j in rep.ap_decomposition],
        "residual_pairs": [list(p) for p in rep.residual_pairs],
    }
    if args.check_gap:
        chk = gap_bound_check(F.system, x, G.system, y, args.steps, _bits(args), args.budget)
        body["gap_check"] = {"holds": chk.holds, "bound": chk.bound, "schedule": [list(s) for s in chk.schedule]}
    rows = [{"n": n, "m": m} for n, m in rep.pairs]
    _emit(args, render.envelope("intersect", F.label, body), ("n", "m"), rows)


def cmd_preperiodic(args) -> None:
    L = load_file(args.system)
    results = []
    for p in args.point:
        x = parse_point(L, p)
        r = detect_preperiodic(L.system, x, args.max_steps, args.budget)
        results.append({"point": format_point(x), "preperiodic": r.preperiodic, "tail": r.tail_length,
                        "period": r.period, "truncated": r.truncated, "reason": r.reason,
                        "steps_recorded": len(r.points)})
    rows = [{k: r[k] for k in ("point", "preperiodic", "tail", "period", "reason")} for r in results]
    _emit(args, render.envelope("preperiodic", L.label, {"results": results}),
          ("point", "preperiodic", "tail", "period", "reason"), rows)


# --- parser ---------------------------------------------------------------

def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


POINT_HELP = "point to evaluate; repeat for several points (syntax depends on the system kind)"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", required=True, help="JSON system description (schema 1)")
    common.add_argument("--tolerance", type=_positive_float, default=1e-4, help="target error for certified estimates")
    common.add_argument("--precision-bits", type=int, default=None,
                        help="ball precision; defaults to $HEIGHTLAB_PRECISION_BITS or 128")
    common.add_argument("--budget", type=int, default=DIGITS_BUDGET,
                        help="stop orbits whose coordinates exceed this many decimal digits")
    common.add_argument("--output", choices=("json", "csv"), default="json", help="format written to stdout")
    common.add_argument("--json", metavar="PATH", help="also write the JSON report to PATH")
    common.add_argument("--csv", metavar="PATH", help="also write the table to PATH")
    common.add_argument("--digits", type=int, default=17, help="significant digits in decimal renderings")
    common.add_argument("--jobs", type=int, default=1, help="worker processes across independent points")

    p = argparse.ArgumentParser(prog="heightlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"heightlab {render.__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectral", parents=[common], help="dynamical degree and growth exponent")
    s.set_defaults(fn=cmd_spectral)

    s = sub.add_parser("series", parents=[common], help="normalized height sequence a_n")
    s.add_argument("--point", action="append", required=True, help=POINT_HELP)
    s.add_argument("--steps", type=int, default=20, help="largest n in the table")
    s.set_defaults(fn=cmd_series)

    s = sub.add_parser("canonical", parents=[common], help="canonical height estimates")
    s.add_argument("--point", action="append", required=True, help=POINT_HELP)
    s.add_argument("--steps", type=int, default=6, help="orbit length for Wehler and empirical estimates")
    s.set_defaults(fn=cmd_canonical)

    s = sub.add_parser("zf", parents=[common], help="membership in the height-zero locus (lattice systems)")
    s.add_argument("--point", action="append", required=True, help=POINT_HELP)
    s.set_defaults(fn=cmd_zf)

    s = sub.add_parser("scan", parents=[common], help="preperiodic points of bounded height on P^1")
    s.add_argument("--bound", type=int, required=True, help="scan points of multiplicative height at most this")
    s.add_argument("--max-steps", type=int, default=64, help="orbit steps before a candidate is reported as an anomaly")
    s.set_defaults(fn=cmd_scan)

    s = sub.add_parser("intersect", parents=[common], help="intersection of two orbits")
    s.add_argument("--system2", help="second system; defaults to --system")
    s.add_argument("--x", required=True, help="start point of the first orbit")
    s.add_argument("--y", required=True, help="start point of the second orbit")
    s.add_argument("--steps", type=int, default=20, help="orbit length N")
    s.add_argument("--check-gap", action="store_true", help="also verify the gap bound over N/4, N/2, N")
    s.set_defaults(fn=cmd_intersect)

    s = sub.add_parser("preperiodic", parents=[common], help="cycle detection on exact orbits")
    s.add_argument("--point", action="append", required=True, help=POINT_HELP)
    s.add_argument("--max-steps", type=int, default=1000, help="give up after this many steps")
    s.set_defaults(fn=cmd_preperiodic)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.precision_bits is not None and args.precision_bits < 16:
            raise InputError("must be at least 16", "--precision-bits")
        if args.jobs < 1:
            raise InputError("must be at least 1", "--jobs")
        if args.precision_bits is None:
            try:
                default_precision()
            except ValueError as exc:
                raise InputError(str(exc), "HEIGHTLAB_PRECISION_BITS") from None
        args.fn(args)
    except HeightLabError as exc:
        print(f"heightlab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
