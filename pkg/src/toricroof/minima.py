"""Successive minima, heights, arithmetic volumes and the Zhang sandwich."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .adelic import DivisorSpec, global_roof, local_roof, validate
from .concave import (
    NotExactlyRepresentable,
    integrate,
    integrate_positive,
    max_over_face,
    roof_eval,
    vmax,
    vmin,
)
from .exactnum import LogValue, lv_from_log_rational, value_float, value_sign
from .geometry import Polytope

__all__ = [
    "MinimaReport",
    "ZhangReport",
    "arith_volume",
    "chi_volume",
    "degree",
    "essential_minimum",
    "face_values",
    "height",
    "successive_minima",
    "zhang",
]

CERTIFIED = "certified"
FORMULA_ONLY = "formula-only (lower bound when D nef)"


def _fmt(v):
    return v.to_text() if isinstance(v, LogValue) else str(v)


def _point_text(pt):
    if pt is None:
        return None
    return [repr(float(c)) if isinstance(c, float) else str(c) for c in pt]


def exact_text(v):
    """Canonical string for an exact value, None for a float."""
    return None if isinstance(v, float) else _fmt(v)


def value_fields(name, v) -> dict:
    """{name: exact string or None, name_approx: float}."""
    return {name: exact_text(v), name + "_approx": value_float(v)}


def list_fields(name, vs) -> dict:
    return {name: [exact_text(v) for v in vs], name + "_approx": [value_float(v) for v in vs]}


@dataclass
class MinimaReport:
    mu: list
    ess: object
    abs: object
    per_face_witnesses: dict = field(default_factory=dict)
    certified: bool = True
    provenance: str = "exact"

    @property
    def label(self) -> str:
        return CERTIFIED if self.certified else FORMULA_ONLY

    def to_json(self):
        return {
            **list_fields("mu", self.mu),
            **value_fields("ess", self.ess),
            **value_fields("abs", self.abs),
            "label": self.label,
            "provenance": self.provenance,
            "witnesses": {
                str(i): [
                    {"face": [[str(c) for c in v] for v in face], "argmax": _point_text(pt)}
                    for face, pt in ws
                ]
                for i, ws in self.per_face_witnesses.items()
            },
        }


@dataclass
class ZhangReport:
    sum_mu: object
    height_over_degree: object
    bound: object
    left_holds: bool
    right_holds: bool
    right_equality: bool
    left_equality: bool
    equality_diagnosis: dict

    def to_json(self):
        return {
            **value_fields("sum_mu", self.sum_mu),
            **value_fields("height_over_degree", self.height_over_degree),
            **value_fields("bound", self.bound),
            "left_holds": self.left_holds,
            "right_holds": self.right_holds,
            "left_equality": self.left_equality,
            "right_equality": self.right_equality,
            "equality_diagnosis": self.equality_diagnosis,
        }


# ---------------------------------------------------------------------------
# face values


def _smooth_only(spec: DivisorSpec):
    sm = spec.smooth_entries
    if len(sm) != 1:
        return None
    others = [e for e in spec.non_canonical() if e is not sm[0]]
    return None if others else sm[0]


def smooth_face_value(entry, face: Polytope):
    """max of the roof over a face for a lone smooth place: (n_v/lam) log sum_{m_j in F} w_j."""
    m = entry.metric
    total = sum((w for p, w in zip(m.points, m.weights) if face.contains(p)), Fraction(0))
    if total <= 0:
        raise ValueError("smooth metric has zero weight on a face vertex")
    return lv_from_log_rational(total, entry.weight / m.lam)


def face_values(spec: DivisorSpec, d: int):
    """[(face, max of the roof on it, argmax or None)] for all d-faces of the polytope."""
    delta = spec.polytope
    out = []
    if spec.is_exact_path:
        theta = global_roof(spec)
        for f in delta.faces(d):
            v, pt = max_over_face(theta, f, witness=True)
            out.append((f, v, pt))
        return out
    lone = _smooth_only(spec)
    if lone is not None:
        for f in delta.faces(d):
            out.append((f, smooth_face_value(lone, f), None))
        return out
    from .smoothsolve import solve

    for f in delta.faces(d):
        res = solve(spec, face=f)
        out.append((f, res.mu_ess, tuple(res.x_opt) if res.x_opt is not None else None))
    return out


def essential_minimum(spec: DivisorSpec):
    delta = spec.polytope
    return face_values(spec, delta.dim)[0][1] if delta.dim >= 0 else None


def successive_minima(spec: DivisorSpec) -> MinimaReport:
    """mu^i = min over faces of dimension n-i+1 of the max of the roof on the face."""
    validate(spec).raise_if_invalid()
    delta = spec.polytope
    n = delta.dim
    mu, wit = [], {}
    for i in range(1, n + 2):
        vals = face_values(spec, n - i + 1)
        mu.append(vmin(v for _, v, _ in vals))
        wit[i] = [(f.vertices, pt) for f, _, pt in vals]
    if spec.is_exact_path:
        theta = global_roof(spec)
        at_vertices = vmin(roof_eval(theta, v) for v in delta.vertices)
        if value_sign(at_vertices - mu[-1]) != 0:
            raise AssertionError("absolute minimum differs from the minimum over vertices")
        provenance = "numeric" if theta.is_numeric else "exact"
    else:
        provenance = "closed-form" if _smooth_only(spec) is not None else "numeric"
    for a, b in zip(mu, mu[1:]):
        if value_sign(a - b) < 0:
            raise AssertionError("successive minima are not monotone")
    return MinimaReport(
        mu=mu,
        ess=mu[0],
        abs=mu[-1],
        per_face_witnesses=wit,
        certified=spec.semipositive and spec.ample,
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# heights and volumes


def degree(spec: DivisorSpec) -> Fraction:
    n = spec.rank
    return math.factorial(n) * spec.polytope.volume()


def chi_volume(spec: DivisorSpec):
    n = spec.rank
    return math.factorial(n + 1) * integrate(global_roof(spec))


def height(spec: DivisorSpec):
    """(n+1)! times the integral of the global roof (the height when D is semipositive)."""
    return chi_volume(spec)


def arith_volume(spec: DivisorSpec):
    """(n+1)! times the integral of max(0, roof); a float if the zero level is irrational."""
    n = spec.rank
    theta = global_roof(spec)
    try:
        return math.factorial(n + 1) * integrate_positive(theta)
    except NotExactlyRepresentable:
        return math.factorial(n + 1) * integrate_positive(theta, exact=False)


def _equality_diagnosis(spec: DivisorSpec):
    per_place = {}
    total = None
    affine = True
    for e in spec.non_canonical():
        th = local_roof(spec, e)
        if th.is_affine():
            g = th.gradients()[0]
            per_place[e.place.label()] = {"affine": True, "gradient": [_fmt(c) for c in g]}
            scaled = [e.weight * c for c in g]
            total = scaled if total is None else [a + b for a, b in zip(total, scaled)]
        else:
            per_place[e.place.label()] = {"affine": False}
            affine = False
    balanced = total is None or all(value_sign(c) == 0 for c in total)
    return {
        "places": per_place,
        "all_affine": affine,
        "gradients_balanced": balanced,
        "translated_canonical": affine and balanced,
    }


def zhang(spec: DivisorSpec) -> ZhangReport:
    if spec.smooth_entries:
        raise ValueError("the Zhang check needs piecewise-affine roofs; heights of smooth metrics are not computed")
    deg = degree(spec)
    if deg <= 0:
        raise ValueError("degenerate polytope: degree must be positive")
    rep = successive_minima(spec)
    n = spec.rank
    sum_mu = rep.mu[0]
    for m in rep.mu[1:]:
        sum_mu = sum_mu + m
    hd = height(spec) / deg
    bound = (n + 1) * rep.ess
    left = value_sign(hd - sum_mu)
    right = value_sign(bound - hd)
    return ZhangReport(
        sum_mu=sum_mu,
        height_over_degree=hd,
        bound=bound,
        left_holds=left >= 0,
        right_holds=right >= 0,
        left_equality=left == 0,
        right_equality=right == 0,
        equality_diagnosis=_equality_diagnosis(spec),
    )
