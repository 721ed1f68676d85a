"""Command-line interface: divisor files, minima, Zhang bounds, smooth solves, builders and plots.

Exit codes: 0 ok, 2 parse error, 3 validation or builder error, 4 precision
or certification failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from fractions import Fraction

from .adelic import (
    ARCH,
    Canonical,
    DivisorSpec,
    Place,
    PsiMetric,
    RoofMetric,
    SmoothMetric,
    global_roof,
    local_roof,
    validate,
)
from .concave import CellwisePA, NotExactlyRepresentable, RoofFn, _value_from_json, roof_eval
from .exactnum import PrecisionExhausted, as_fraction, value_float
from .geometry import Polytope, hull, qpoint
from .minima import exact_text, list_fields, successive_minima, value_fields, zhang
from .smoothsolve import NoCertificate

SCHEMA_VERSION = 1
EXIT_PARSE, EXIT_VALIDATION, EXIT_PRECISION = 2, 3, 4

_TOP_FIELDS = {"schema_version", "rank", "polytope", "places", "flags", "note", "builder"}
_PLACE_FIELDS = {"place", "weight", "metric"}
_FLAG_FIELDS = {"semipositive", "ample"}


class DivisorFileError(ValueError):
    """Malformed divisor file (maps to exit code 2)."""


class ValidationFailure(ValueError):
    """Well-formed but inconsistent input (maps to exit code 3)."""


# ---------------------------------------------------------------------------
# DivisorFile <-> DivisorSpec


def _rat(x, what):
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise DivisorFileError(f"{what}: expected a rational string, got {x!r}")
    try:
        return as_fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise DivisorFileError(f"{what}: bad rational {x!r}") from exc


def _point(seq, what):
    if not isinstance(seq, list):
        raise DivisorFileError(f"{what}: expected a list of rationals")
    return tuple(_rat(c, what) for c in seq)


def _check_keys(obj, allowed, what, required=()):
    if not isinstance(obj, dict):
        raise DivisorFileError(f"{what}: expected an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise DivisorFileError(f"{what}: unknown fields {sorted(extra)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise DivisorFileError(f"{what}: missing fields {missing}")


def _parse_smooth(body, what, with_lambda):
    keys = {"points", "weights"} | ({"lambda"} if with_lambda else set())
    _check_keys(body, keys, what, required=sorted(keys))
    pts = [_point(p, what) for p in body["points"]]
    ws = [_rat(w, what) for w in body["weights"]]
    lam = _rat(body["lambda"], what) if with_lambda else Fraction(2)
    try:
        return SmoothMetric(tuple(pts), tuple(ws), lam)
    except ValueError as exc:
        raise ValidationFailure(f"{what}: {exc}") from exc


def _parse_roof(body, what):
    _check_keys(body, {"domain", "generators"}, what, required=["generators"])
    try:
        gens = [(_point(p, what), _value_from_json(v)) for p, v in body["generators"]]
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DivisorFileError):
            raise
        raise DivisorFileError(f"{what}: malformed generators ({exc})") from exc
    roof = RoofFn(gens)
    if "domain" in body:
        dom = _parse_polytope_json(body["domain"], what)
        if dom != roof.domain:
            raise ValidationFailure(f"{what}: domain mismatch")
    return roof


def _parse_polytope_json(obj, what):
    _check_keys(obj, {"ambient_rank", "vertices"}, what, required=["vertices"])
    verts = [_point(v, what) for v in obj["vertices"]]
    return hull(verts, ambient_rank=obj.get("ambient_rank"))


def _parse_metric(m, what):
    if m == "canonical":
        return Canonical()
    if not isinstance(m, dict) or len(m) != 1:
        raise DivisorFileError(f"{what}: metric must be 'canonical' or a one-key object")
    (kind, body), = m.items()
    if kind == "roof":
        return RoofMetric(_parse_roof(body, what))
    if kind == "psi":
        try:
            return PsiMetric(CellwisePA.from_json(body))
        except (KeyError, TypeError, ValueError) as exc:
            raise DivisorFileError(f"{what}: malformed psi ({exc})") from exc
    if kind == "smooth_fs":
        return _parse_smooth(body, what, with_lambda=False)
    if kind == "smooth_lp":
        return _parse_smooth(body, what, with_lambda=True)
    raise DivisorFileError(f"{what}: unknown metric kind {kind!r}")


def spec_from_json(obj) -> DivisorSpec:
    """Parse a DivisorFile object. Raises DivisorFileError or ValidationFailure."""
    _check_keys(obj, _TOP_FIELDS, "divisor file", required=["schema_version", "rank", "polytope", "places"])
    if obj["schema_version"] != SCHEMA_VERSION:
        raise DivisorFileError(f"unsupported schema_version {obj['schema_version']!r}")
    rank = obj["rank"]
    if isinstance(rank, bool) or not isinstance(rank, int) or rank < 0:
        raise DivisorFileError("rank must be a nonnegative integer")
    if not isinstance(obj["polytope"], list) or not obj["polytope"]:
        raise DivisorFileError("polytope: expected a nonempty vertex list")
    verts = [_point(v, "polytope") for v in obj["polytope"]]
    if any(len(v) != rank for v in verts):
        raise ValidationFailure("polytope: vertex of the wrong rank")
    delta = hull(verts, ambient_rank=rank)
    flags = obj.get("flags", {})
    _check_keys(flags, _FLAG_FIELDS, "flags")
    for k, v in flags.items():
        if not isinstance(v, bool):
            raise DivisorFileError(f"flags.{k}: expected a boolean")
    spec = DivisorSpec(
        rank,
        delta,
        semipositive=flags.get("semipositive", True),
        ample=flags.get("ample", True),
        note=obj.get("note", ""),
    )
    if "builder" in obj:
        spec.meta["builder"] = obj["builder"]
    if not isinstance(obj["places"], list):
        raise DivisorFileError("places: expected a list")
    for k, entry in enumerate(obj["places"]):
        what = f"places[{k}]"
        _check_keys(entry, _PLACE_FIELDS, what, required=["place", "metric"])
        try:
            place = Place.parse(entry["place"])
        except (ValueError, TypeError, AttributeError) as exc:
            raise DivisorFileError(f"{what}: {exc}") from exc
        weight = _rat(entry.get("weight", "1"), what + ".weight")
        spec.add(place, _parse_metric(entry["metric"], what), weight)
    return spec


def _metric_to_json(m):
    if isinstance(m, Canonical):
        return "canonical"
    if isinstance(m, RoofMetric):
        return {"roof": m.roof.to_json()}
    if isinstance(m, PsiMetric):
        return {"psi": m.psi.to_json()}
    if isinstance(m, SmoothMetric):
        body = {"points": [[str(c) for c in p] for p in m.points], "weights": [str(w) for w in m.weights]}
        if m.is_fs:
            return {"smooth_fs": body}
        return {"smooth_lp": {**body, "lambda": str(m.lam)}}
    raise TypeError(f"cannot serialize metric {m!r}")


def spec_to_json(spec: DivisorSpec) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "rank": spec.rank,
        "polytope": [[str(c) for c in v] for v in spec.polytope.vertices],
        "places": [
            {"place": e.place.label(), "weight": str(e.weight), "metric": _metric_to_json(e.metric)}
            for e in spec.entries
        ],
        "flags": {"semipositive": spec.semipositive, "ample": spec.ample},
    }
    if spec.note:
        out["note"] = spec.note
    if "builder" in spec.meta:
        out["builder"] = spec.meta["builder"]
    return out


def load_spec(path) -> DivisorSpec:
    try:
        if path == "-":
            obj = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DivisorFileError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise DivisorFileError(f"{path}: {exc.strerror}") from exc
    spec = spec_from_json(obj)
    report = validate(spec)
    if not report.ok:
        raise ValidationFailure("; ".join(report.errors))
    return spec


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------------------
# minima / zhang / solve


def _line(name, v):
    ex = exact_text(v)
    approx = f"{value_float(v):.15g}"
    return f"{name} = {ex}  (~ {approx})" if ex is not None else f"{name} ~ {approx}"


def cmd_minima(args):
    spec = load_spec(args.file)
    rep = successive_minima(spec)
    idx = list(range(1, len(rep.mu) + 1))
    if args.i != "all":
        try:
            k = int(args.i)
        except ValueError:
            raise DivisorFileError(f"--i expects 'all' or an integer, got {args.i!r}") from None
        if not 1 <= k <= len(rep.mu):
            raise ValidationFailure(f"--i must lie in 1..{len(rep.mu)}")
        idx = [k]
    if args.json:
        if args.i == "all":
            out = rep.to_json()
        else:
            out = {"i": idx[0], **value_fields("mu", rep.mu[idx[0] - 1]), "label": rep.label, "provenance": rep.provenance}
        print(_dump(out))
    else:
        for i in idx:
            print(_line(f"mu^{i}", rep.mu[i - 1]))
        if args.i == "all":
            print(_line("mu_ess", rep.ess))
            print(_line("mu_abs", rep.abs))
        print(f"label: {rep.label}")
        print(f"provenance: {rep.provenance}")
    return 0


def cmd_zhang(args):
    spec = load_spec(args.file)
    rep = zhang(spec)
    if args.json:
        print(_dump(rep.to_json()))
        return 0
    print(_line("sum mu^i", rep.sum_mu))
    print(_line("h/deg", rep.height_over_degree))
    print(_line("(n+1) mu_ess", rep.bound))
    print(f"left inequality holds: {rep.left_holds} (equality: {rep.left_equality})")
    print(f"right inequality holds: {rep.right_holds} (equality: {rep.right_equality})")
    diag = rep.equality_diagnosis
    print(f"translated canonical: {diag['translated_canonical']}")
    return 0


def cmd_solve(args):
    from .smoothsolve import solve

    spec = load_spec(args.file)
    res = solve(spec, tol=args.tol)
    if args.json:
        print(_dump(res.to_json()))
        return 0
    print(f"mu_ess ~ {res.mu_ess:.15g}")
    print("u0 ~ (" + ", ".join(f"{c:.15g}" for c in res.u0) + ")")
    print(f"residual: {res.optimality_residual:.3e}")
    print(f"active generators: {list(res.cell_id)}")
    return 0


def cmd_validate(args):
    spec = load_spec(args.file)
    if args.json:
        print(_dump(spec_to_json(spec)))
    else:
        print(f"ok: rank {spec.rank}, {len(spec.entries)} place(s)")
    return 0


# ---------------------------------------------------------------------------
# build


def _parse_points(text, what="points"):
    """'0,0;1,0;0,1' -> list of QPoints."""
    try:
        return [qpoint(p.split(",")) if p.strip() else () for p in text.split(";")]
    except (ValueError, ZeroDivisionError) as exc:
        raise DivisorFileError(f"{what}: cannot parse {text!r}") from exc


def _parse_list(text, what, conv=as_fraction):
    try:
        return [conv(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise DivisorFileError(f"{what}: cannot parse {text!r}") from exc


def _polytope_arg(args, default_rank=None):
    from .builders import standard_simplex

    if getattr(args, "polytope", None):
        return hull(_parse_points(args.polytope, "--polytope"))
    if getattr(args, "simplex", None) is not None:
        return standard_simplex(args.simplex)
    if default_rank is not None:
        return standard_simplex(default_rank)
    raise ValidationFailure("give --polytope or --simplex")


def _closed(name, vals):
    return list_fields(name, vals) if vals is not None else {}


def _build(args):
    from . import builders as B

    fam = args.family
    meta = {"family": fam}
    if fam == "canonical":
        built = B.canonical(_polytope_arg(args))
    elif fam == "lp":
        delta = _polytope_arg(args)
        if args.alpha:
            alpha = {}
            for item in args.alpha.split(";"):
                pt, _, w = item.partition("=")
                alpha[_parse_points(pt, "--alpha")[0]] = _rat(w, "--alpha")
        else:
            from .geometry import lattice_points

            alpha = {m: Fraction(1) for m in lattice_points(delta)}
        built = B.lp_metric(delta, _rat(args.lam, "--lam"), alpha)
    elif fam == "wps":
        c = _parse_list(args.c, "--c")
        delta = _polytope_arg(args, default_rank=len(c) - 1)
        ell = None
        if args.ell:
            ell = []
            for item in args.ell.split(";"):
                u, _, lmb = item.partition(":")
                ell.append((_parse_points(u, "--ell")[0], _rat(lmb, "--ell")))
        built = B.wps_metric(delta, c, ell)
        meta["height_over_degree"] = exact_text(built.extra["height_over_degree"])
        meta["Lambda"] = str(built.extra["Lambda"])
    elif fam == "bundle":
        built = B.toric_bundle(B.BundleData(args.n, tuple(_parse_list(args.a, "--a", int))))
        meta.update(_closed("mu_ell", built.extra["mu_ell"]))
    elif fam == "hirzebruch":
        built = B.hirzebruch(args.a0, args.b)
    elif fam in ("subtorus", "subtorus-fs"):
        data = B.SubtorusData(
            tuple(tuple(int(c) for c in m) for m in _parse_points(args.exponents, "--exponents")),
            tuple(_parse_list(args.coords, "--coords")),
        )
        built = B.subtorus_canonical(data) if fam == "subtorus" else B.subtorus_fs(data)
    elif fam == "prescribe":
        mu = [float(x) for x in _parse_list(args.mu, "--mu")]
        built, t = B.prescribe(mu, float(_parse_list(args.nu, "--nu")[0]))
        meta["t"] = str(t)
        meta["t_approx"] = float(t)
    else:  # pragma: no cover - argparse restricts choices
        raise DivisorFileError(f"unknown family {fam!r}")
    meta.update(_closed("mu", built.mu))
    built.spec.meta["builder"] = meta
    return built.spec


def cmd_build(args):
    try:
        spec = _build(args)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, (DivisorFileError, ValidationFailure)):
            raise
        raise ValidationFailure(str(exc)) from exc
    print(_dump(spec_to_json(spec)))
    return 0


# ---------------------------------------------------------------------------
# plot

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
_W, _H, _PAD = 640, 420, 60


def _roofs_for_plot(spec: DivisorSpec):
    if spec.rank > 2:
        raise ValidationFailure(f"plot supports rank 1 and 2 only (got rank {spec.rank})")
    if spec.rank == 0:
        raise ValidationFailure("nothing to plot for a rank-0 divisor")
    if spec.smooth_entries:
        raise ValidationFailure("plot needs piecewise-affine roofs; smooth metrics have none (use solve)")
    local = [(e.place.label(), local_roof(spec, e)) for e in spec.non_canonical()]
    return local, global_roof(spec)


def _f(x) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _label_value(v) -> str:
    ex = exact_text(v)
    approx = f"{value_float(v):.4g}"
    return f"{ex} ≈ {approx}" if ex is not None else f"≈ {approx}"


def _pt_text(p) -> str:
    return "(" + ",".join(str(c) for c in p) + ")"


def _svg_1d(local, theta, title):
    xs_dom = [float(v[0]) for v in theta.domain.vertices]
    x0, x1 = min(xs_dom), max(xs_dom)
    series = [(lab, r) for lab, r in local] + [("global", theta)]
    ys = [value_float(v) for _, r in series for v in r.vertex_values.values()] + [0.0]
    y0, y1 = min(ys), max(ys)
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 1, y1 + 1
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 1, x1 + 1

    def sx(x):
        return _PAD + (x - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def sy(y):
        return _H - _PAD - (y - y0) / (y1 - y0) * (_H - 2 * _PAD)

    out = [_svg_head(title)]
    out.append(f'<line x1="{_f(sx(x0))}" y1="{_f(sy(0))}" x2="{_f(sx(x1))}" y2="{_f(sy(0))}" stroke="#999" stroke-width="1"/>')
    for k, (lab, r) in enumerate(series):
        color = "#000000" if lab == "global" else _PALETTE[k % len(_PALETTE)]
        pts = sorted(r.vertex_values.items())
        path = " ".join(f"{_f(sx(float(p[0])))},{_f(sy(value_float(v)))}" for p, v in pts)
        width = 2.5 if lab == "global" else 1.5
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="{width}"/>')
        out.append(f'<text x="{_W - _PAD + 4}" y="{_PAD + 16 * k}" font-size="12" fill="{color}">{_esc(lab)}</text>')
    for p, v in sorted(theta.vertex_values.items()):
        cx, cy = sx(float(p[0])), sy(value_float(v))
        out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="3" fill="#000"/>')
        out.append(
            f'<text x="{_f(cx)}" y="{_f(_H - _PAD + 18)}" font-size="11" text-anchor="middle">{_esc(str(p[0]))}</text>'
        )
        out.append(f'<text x="{_f(cx + 4)}" y="{_f(cy - 6)}" font-size="10">{_esc(_label_value(v))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _ordered_polygon(verts):
    pts = [(float(a), float(b)) for a, b in verts]
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    order = sorted(range(len(pts)), key=lambda i: (math.atan2(pts[i][1] - cy, pts[i][0] - cx), verts[i]))
    return [verts[i] for i in order]


def _svg_2d(theta, title):
    dom = theta.domain
    xs = [float(v[0]) for v in dom.vertices]
    ys = [float(v[1]) for v in dom.vertices]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-12)
    scale = min(_W, _H) - 2 * _PAD

    def sx(x):
        return _PAD + (x - x0) / span * scale

    def sy(y):
        return _H - _PAD - (y - y0) / span * scale

    out = [_svg_head(title)]
    for k, cell in enumerate(sorted(theta.cells, key=lambda c: c.vertices)):
        poly = _ordered_polygon(cell.vertices) if cell.dim == 2 else sorted(cell.vertices)
        path = " ".join(f"{_f(sx(float(p[0])))},{_f(sy(float(p[1])))}" for p in poly)
        tag = "polygon" if cell.dim == 2 else "polyline"
        fill = _PALETTE[k % len(_PALETTE)] if cell.dim == 2 else "none"
        out.append(f'<{tag} points="{path}" fill="{fill}" fill-opacity="0.15" stroke="#000" stroke-width="1.5"/>')
    for p, v in sorted(theta.vertex_values.items()):
        cx, cy = sx(float(p[0])), sy(float(p[1]))
        lattice = all(c.denominator == 1 for c in p)
        out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{3 if lattice else 4}" fill="{"#000" if lattice else "#d62728"}"/>')
        out.append(f'<text x="{_f(cx + 5)}" y="{_f(cy - 5)}" font-size="10">{_esc(_pt_text(p) + ": " + _label_value(v))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _svg_head(title):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">\n'
        f'<rect width="{_W}" height="{_H}" fill="#fff"/>\n'
        f'<text x="{_PAD}" y="24" font-size="14">{_esc(title)}</text>'
    )


def _skeleton_samples(theta, per_edge=4):
    pts = set()
    for cell in theta.cells:
        edges = cell.face_vertex_sets(1) if cell.dim >= 1 else []
        if cell.dim == 0:
            pts.add(cell.vertices[0])
        for e in edges:
            a, b = (cell.vertices[i] for i in sorted(e))
            for k in range(per_edge + 1):
                t = Fraction(k, per_edge)
                pts.add(tuple(x + t * (y - x) for x, y in zip(a, b)))
    return sorted(pts)


def plot_csv(local, theta) -> str:
    buf = io.StringIO()
    n = theta.ambient_rank
    labels = ["global"] + [lab for lab, _ in local]
    buf.write(",".join([f"x{i + 1}" for i in range(n)] + [f"theta_{lab}" for lab in labels]) + "\n")
    roofs = [theta] + [r for _, r in local]
    for p in _skeleton_samples(theta):
        row = [str(c) for c in p] + [repr(value_float(roof_eval(r, p))) for r in roofs]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def plot_svg(spec, local, theta, title="") -> str:
    if spec.rank == 1:
        return _svg_1d(local, theta, title)
    return _svg_2d(theta, title)


def cmd_plot(args):
    spec = load_spec(args.file)
    local, theta = _roofs_for_plot(spec)
    title = spec.note or ("roof functions" if spec.rank == 1 else "subdivision of the global roof")
    text = plot_csv(local, theta) if args.out == "csv" else plot_svg(spec, local, theta, title)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toricroof", description="Successive minima of toric metrized divisors over Q.")
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--json", action="store_true", help="JSON output")
        g.add_argument("--text", action="store_true", help="text output (default)")

    sp = sub.add_parser("minima", help="successive minima of a divisor file")
    sp.add_argument("file")
    sp.add_argument("--i", default="all", help="'all' or an index 1..n+1")
    fmt(sp)
    sp.set_defaults(func=cmd_minima)

    sp = sub.add_parser("zhang", help="check the Zhang sandwich")
    sp.add_argument("file")
    fmt(sp)
    sp.set_defaults(func=cmd_zhang)

    sp = sub.add_parser("solve", help="numeric essential minimum for a smooth Archimedean metric")
    sp.add_argument("file")
    sp.add_argument("--tol", type=float, default=1e-10)
    fmt(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("validate", help="parse and validate a divisor file")
    sp.add_argument("file")
    fmt(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("plot", help="SVG or CSV of the roof functions")
    sp.add_argument("file")
    sp.add_argument("--out", choices=["svg", "csv"], default="svg")
    sp.add_argument("-o", "--output", default="-", help="output path (default stdout)")
    sp.set_defaults(func=cmd_plot)

    bp = sub.add_parser("build", help="emit a divisor file for a standard family")
    fam = bp.add_subparsers(dest="family", required=True)

    def poly(sp):
        sp.add_argument("--polytope", help="vertices, e.g. '0,0;1,0;0,1'")
        sp.add_argument("--simplex", type=int, help="standard simplex of this dimension")

    sp = fam.add_parser("canonical")
    poly(sp)
    sp = fam.add_parser("lp")
    poly(sp)
    sp.add_argument("--lam", default="2")
    sp.add_argument("--alpha", help="weights 'm=alpha;...', default 1 at every lattice point")
    sp = fam.add_parser("wps")
    poly(sp)
    sp.add_argument("--c", required=True, help="positive rationals c_0,...,c_n")
    sp.add_argument("--ell", help="affine functions 'u:lambda;...' (default: facet normals)")
    sp = fam.add_parser("bundle")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--a", required=True, help="twists a_0,...,a_r")
    sp = fam.add_parser("hirzebruch")
    sp.add_argument("--a0", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    for name in ("subtorus", "subtorus-fs"):
        sp = fam.add_parser(name)
        sp.add_argument("--exponents", required=True, help="m_1;...;m_r, e.g. '1;2;3' or '1,0;0,1'")
        sp.add_argument("--coords", required=True, help="p_0,...,p_r, e.g. '1,4,1/3,1/2'")
    sp = fam.add_parser("prescribe")
    sp.add_argument("--mu", required=True, help="mu_1,...,mu_{r+1} (non-increasing)")
    sp.add_argument("--nu", required=True, help="target height")
    bp.set_defaults(func=cmd_build)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivisorFileError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PrecisionExhausted as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except NoCertificate as exc:
        print(f"no certificate: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (ValidationFailure, NotExactlyRepresentable, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
