"""Command-line entry point: ``schoenlab <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import reports
from .cantor_comb import CombParams, big_gamma, stage
from .certificates import certify_t1, t2_partial_sum
from .cusp_john import CuspParams, john_domain
from .figures import FIGURES
from .harmonic import UnitDisk, WoSConfig, arc_classifier, floor_classifier, top_side_classifier, wos_measure
from .inner_metric import PolyDomain, geodesic, grid_geodesic


class UsageError(Exception):
    pass


def _point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y but got {text!r}") from None
    return x, y


def _dyadic_fraction(text: str) -> Fraction:
    q = Fraction(text)
    if q.denominator & (q.denominator - 1):
        raise argparse.ArgumentTypeError(f"{text!r} is not a dyadic rational")
    return q


_started = time.perf_counter()


class Session:
    """Collects outputs, writes them atomically, then writes one manifest per output."""

    def __init__(self, argv, parameters: dict, seeds=(), inputs=()):
        self.argv = list(argv)
        self.parameters = parameters
        self.seeds = list(seeds)
        self.inputs = [Path(p) for p in inputs]
        self.pending: list[tuple[Path, str]] = []

    def add(self, path, text: str) -> Path:
        p = reports.resolve_out(path)
        self.pending.append((p, text))
        return p

    def commit(self) -> list[Path]:
        written = [reports.write_atomic(p, text) for p, text in self.pending]
        seconds = time.perf_counter() - _started
        for p in written:
            man = reports.manifest_payload(["schoenlab", *self.argv], self.parameters, self.seeds, self.inputs, [p], seconds)
            reports.validate(man, "manifest")
            reports.write_atomic(reports.manifest_path(p), reports.dumps(man))
        return written


def _outputs(listing: str, allowed: set[str]) -> list[Path]:
    paths = [Path(p) for p in listing.split(",") if p]
    for p in paths:
        if p.suffix.lower() not in allowed:
            raise UsageError(f"unsupported output type {p.suffix!r}; expected one of {sorted(allowed)}")
    return paths


# ---------------------------------------------------------------------------
# commands


def cmd_cantor(args, argv):
    payload = reports.cantor_payload(args.depth)
    reports.validate(payload, "cantor")
    s = Session(argv, {"depth": args.depth})
    s.add(args.out, reports.dumps(payload))
    return s


def cmd_curve_t1(args, argv):
    from .figures import comb_side_teeth_svg

    outs = _outputs(args.out, {".svg", ".json"})
    params = CombParams(args.depth, args.rho)
    curve = big_gamma(params)
    s = Session(argv, {"depth": args.depth, "rho": str(args.rho)})
    for p in outs:
        if p.suffix.lower() == ".json":
            payload = reports.t1_curve_payload(curve, args.depth, args.rho)
            reports.validate(payload, "curve_t1")
            s.add(p, reports.dumps(payload))
        else:
            s.add(p, comb_side_teeth_svg(args.depth, args.rho))
    return s


def cmd_curve_t2(args, argv):
    from .figures import cusp_square_svg

    outs = _outputs(args.out, {".svg", ".json"})
    params = CuspParams(args.s, args.bigc, args.depth, args.arc_samples)
    poly = john_domain(params)
    s = Session(argv, {"depth": args.depth, "s": args.s, "C": args.bigc, "arc_samples": args.arc_samples})
    for p in outs:
        if p.suffix.lower() == ".json":
            payload = reports.t2_curve_payload(poly, args.s, args.bigc, args.depth, args.arc_samples)
            reports.validate(payload, "curve_t2")
            s.add(p, reports.dumps(payload))
        else:
            s.add(p, cusp_square_svg(args.depth, args.arc_samples) if args.s == 0.5 and args.bigc == 1.0
                  else _generic_t2_svg(poly, args))
    return s


def _generic_t2_svg(poly, args) -> str:
    cv = reports.SvgCanvas((-0.05, -0.05, 1.05, 1.05), title=f"cusped slits s={args.s} C={args.bigc}")
    cv.polyline(cv.group("domain"), poly.xy, "jordan-polygon", closed=True)
    return cv.tostring()


def _load_domain(path: str, kind: str) -> PolyDomain:
    payload = json.loads(Path(path).read_text())
    poly = reports.polygon_from_payload(payload)
    return PolyDomain.interior(poly) if kind == "interior" else PolyDomain.exterior_boxed(poly)


def cmd_geodesic(args, argv):
    dom = _load_domain(args.domain, args.kind)
    if args.grid:
        length = grid_geodesic(dom, args.src, args.dst, args.grid)
        payload = {"length": length, "path": [], "method": "grid", "h": args.grid}
    else:
        payload = geodesic(dom, args.src, args.dst).to_json()
    reports.validate(payload, "geodesic")
    s = Session(argv, {"kind": args.kind, "from": list(args.src), "to": list(args.dst), "grid": args.grid},
                inputs=[args.domain])
    _emit(s, args.out, payload)
    return s


def cmd_harmonic(args, argv):
    if args.domain == "disk":
        dom, inputs = UnitDisk(), []
    else:
        dom, inputs = _load_domain(args.domain, "interior"), [args.domain]
    kind, *extra = args.target
    if kind == "arc":
        if len(extra) != 1:
            raise UsageError("arc target needs A,B")
        a, b = _point(extra[0])
        classifier = arc_classifier(a, b)
    elif kind in ("floor-cantor", "top-side"):
        if isinstance(dom, UnitDisk):
            raise UsageError(f"{kind} target needs a polygon domain")
        if kind == "top-side":
            classifier = top_side_classifier(dom)
        elif extra:
            classifier = floor_classifier(dom, stage(int(extra[0])).interval_floats())
        else:
            classifier = floor_classifier(dom)
    else:
        raise UsageError(f"unknown target {kind!r}")
    cfg = WoSConfig(args.eps, args.samples, args.seed)
    est = wos_measure(dom, args.x0, classifier, cfg)
    payload = est.to_json(seed=args.seed, epsilon=args.eps)
    reports.validate(payload, "harmonic")
    s = Session(argv, {"domain": args.domain, "x0": list(args.x0), "target": args.target, "samples": args.samples,
                       "epsilon": args.eps}, seeds=[args.seed], inputs=inputs)
    _emit(s, args.out, payload)
    return s


def _emit(session: Session, out, payload):
    text = reports.dumps(payload)
    if out:
        session.add(out, text)
    else:
        sys.stdout.write(text)


def cmd_certify_t1(args, argv):
    rows = []
    for n in range(min(2, args.depth), args.depth + 1):
        cfg = WoSConfig(args.eps if args.eps else 2.0 ** -(2 * n + 6), args.samples, args.seed)
        cert = certify_t1(n, CombParams(n, args.rho), cfg)
        rows.append(cert.row())
    lbs = [r["LB"] for r in rows]
    by_n = {r["n"]: r["LB"] for r in rows}
    summary = {
        "kind": "t1",
        "rows": rows,
        "nondecreasing": all(b >= a for a, b in zip(lbs, lbs[1:])),
        "ratio_last_to_3": by_n[args.depth] / by_n[3] if 3 in by_n and args.depth > 3 else None,
    }
    reports.validate(summary, "certify_t1")
    s = Session(argv, {"depth": args.depth, "rho": str(args.rho), "samples": args.samples, "epsilon": args.eps},
                seeds=[args.seed])
    s.add(Path(args.out_dir) / f"certify_t1_n{args.depth}.csv", reports.csv_text(reports.T1_COLUMNS, rows))
    s.add(Path(args.out_dir) / f"certify_t1_n{args.depth}.json", reports.dumps(summary))
    return s


def cmd_certify_t2(args, argv):
    cert = t2_partial_sum(args.n, args.s, args.bigc)
    rows = []
    for i, (term, S) in enumerate(zip(cert.terms, cert.partial_sums()), start=1):
        if cert.exact:
            rows.append({"i": i, "term": reports.fraction_text(term), "term_decimal": repr(float(term)),
                         "S": reports.fraction_text(S), "S_decimal": repr(float(S)), "s": args.s, "C": args.bigc})
        else:
            rows.append({"i": i, "term": repr(term), "term_decimal": repr(term), "S": repr(S), "S_decimal": repr(S),
                         "s": args.s, "C": args.bigc})
    total = cert.S_N
    summary = {
        "kind": "t2", "s": args.s, "C": args.bigc, "N": args.n, "exact": cert.exact,
        "S_N": reports.fraction_text(total) if cert.exact else repr(total),
        "S_N_decimal": repr(float(total)),
    }
    reports.validate(summary, "certify_t2")
    s = Session(argv, {"n": args.n, "s": args.s, "C": args.bigc})
    s.add(Path(args.out_dir) / f"certify_t2_N{args.n}.csv", reports.csv_text(reports.T2_COLUMNS, rows))
    s.add(Path(args.out_dir) / f"certify_t2_N{args.n}.json", reports.dumps(summary))
    return s


def cmd_figures(args, argv):
    s = Session(argv, {})
    for name, draw in FIGURES.items():
        s.add(Path(args.out_dir) / name, draw())
    return s


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schoenlab", description="Comb and cusp Jordan domains: exact curves, geodesics, harmonic measure and certificates.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cantor", help="Cantor stage intervals and gaps as exact JSON")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=cmd_cantor)

    curve = sub.add_parser("curve", help="generate a boundary curve").add_subparsers(dest="which", required=True)
    p = curve.add_parser("t1", help="decorated comb")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--rho", type=_dyadic_fraction, default=Fraction(3, 4))
    p.add_argument("--out", required=True, help="comma-separated .svg and/or .json paths")
    p.set_defaults(run=cmd_curve_t1)
    p = curve.add_parser("t2", help="square with cusped slits")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--bigc", type=float, default=1.0)
    p.add_argument("--arc-samples", type=int, default=64)
    p.add_argument("--out", required=True, help="comma-separated .svg and/or .json paths")
    p.set_defaults(run=cmd_curve_t2)

    p = sub.add_parser("geodesic", help="inner distance in a stored domain")
    p.add_argument("--domain", required=True, help="JSON written by the curve command")
    p.add_argument("--kind", choices=["interior", "exterior"], required=True)
    p.add_argument("--from", dest="src", type=_point, required=True)
    p.add_argument("--to", dest="dst", type=_point, required=True)
    p.add_argument("--grid", type=float, default=None, help="use the grid oracle with this cell size")
    p.add_argument("--out")
    p.set_defaults(run=cmd_geodesic)

    p = sub.add_parser("harmonic", help="walk-on-spheres harmonic measure")
    p.add_argument("--domain", required=True, help="curve JSON, or 'disk' for the unit disk")
    p.add_argument("--x0", type=_point, required=True)
    p.add_argument("--target", nargs="+", required=True,
                   help="floor-cantor [STAGE] | top-side | arc A,B")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(run=cmd_harmonic)

    cert = sub.add_parser("certify", help="energy certificates").add_subparsers(dest="which", required=True)
    p = cert.add_parser("t1", help="comb certificate rows for depths 2..n")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--rho", type=_dyadic_fraction, default=Fraction(3, 4))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--eps", type=float, default=None, help="default: 2^-(2n+6) per depth")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(run=cmd_certify_t1)
    p = cert.add_parser("t2", help="slit series partial sums")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--bigc", type=float, default=1.0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(run=cmd_certify_t2)

    p = sub.add_parser("figures", help="regenerate the three construction drawings")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(run=cmd_figures)
    return ap


def main(argv=None) -> int:
    global _started
    _started = time.perf_counter()
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        session = args.run(args, argv)
        for p in session.commit():
            print(p, file=sys.stderr)
    except (UsageError, ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"schoenlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
