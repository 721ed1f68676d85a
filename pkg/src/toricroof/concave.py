"""Piecewise-affine concave functions on polytopes and their Legendre duals.

A roof function is stored in generator form: lifted points (x_k, t_k) whose
upper envelope over conv(x_k) is the function. Values may be LogValues,
Fractions or floats (numeric roofs); LogValues and floats never mix.

The dual side (functions on N_R) is :class:`CellwisePA`, a piecewise-affine
function on a complete subdivision of R^n into pointed polyhedra.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .exactnum import NEG_INF, LogValue, as_fraction, value_float, value_sign
from .geometry import (
    Polytope,
    Subdivision,
    _dot,
    affine_rank,
    common_refinement,
    extreme_rays,
    hull,
    lincomb,
    qpoint,
    rank,
    solve_generic,
    upper_hull_cells,
)

__all__ = [
    "CellwisePA",
    "NotExactlyRepresentable",
    "PACell",
    "RoofFn",
    "concavify",
    "dual_cellwise_to_roof",
    "integrate",
    "integrate_positive",
    "max_over_face",
    "psi_eval",
    "roof_eval",
    "roof_to_cellwise",
    "roof_weighted_sum",
    "subdifferential_psi",
    "vmax",
    "vmin",
]


class NotExactlyRepresentable(ValueError):
    """The exact result would leave the LogValue world."""


class StabilityDefect(ValueError):
    """The psi function violates the recession condition."""


def vmax(values):
    best = None
    for v in values:
        if best is None or value_sign(v - best) > 0:
            best = v
    return best


def vmin(values):
    best = None
    for v in values:
        if best is None or value_sign(v - best) < 0:
            best = v
    return best


def _ratio(a, b):
    """Rational c with a == c*b, or None."""
    if isinstance(a, LogValue) or isinstance(b, LogValue):
        a = LogValue._coerce(a)
        b = LogValue._coerce(b)
        if b.is_zero():
            return None
        if b.const:
            c = a.const / b.const
        else:
            p, q = next(iter(b.logs.items()))
            c = a.logs.get(p, Fraction(0)) / q
        return c if a == b * c else None
    if isinstance(a, float) or isinstance(b, float):
        return None
    return Fraction(a) / Fraction(b) if b else None


def _value_to_json(v):
    if isinstance(v, LogValue):
        return v.to_json()
    if isinstance(v, float):
        return {"numeric": v}
    return LogValue(v).to_json()


def _value_from_json(obj):
    if isinstance(obj, dict) and set(obj) == {"numeric"}:
        return float(obj["numeric"])
    return LogValue.from_json(obj)


# ---------------------------------------------------------------------------
# roof functions


class RoofFn:
    """Concave piecewise-affine function on a polytope, in generator form."""

    def __init__(self, generators, domain: Polytope | None = None):
        gens = [(qpoint(p), v) for p, v in generators]
        if not gens:
            raise ValueError("a roof function needs at least one generator")
        self.generators = tuple(gens)
        n = len(gens[0][0])
        span = hull([p for p, _ in gens], ambient_rank=n)
        if domain is None:
            domain = span
        elif domain != span:
            raise ValueError("domain mismatch: generator points do not span the given polytope")
        self.domain = domain

    # -- constructors --------------------------------------------------
    @classmethod
    def zero(cls, domain: Polytope):
        return cls([(v, Fraction(0)) for v in domain.vertices], domain)

    @classmethod
    def constant(cls, domain: Polytope, c):
        return cls([(v, c) for v in domain.vertices], domain)

    def scaled(self, w):
        w = as_fraction(w)
        return RoofFn([(p, w * v) for p, v in self.generators], self.domain)

    def to_float(self):
        return RoofFn([(p, value_float(v)) for p, v in self.generators], self.domain)

    @property
    def ambient_rank(self):
        return self.domain.ambient_rank

    @property
    def is_numeric(self) -> bool:
        return any(isinstance(v, float) for _, v in self.generators)

    # -- cached envelope data -----------------------------------------
    @cached_property
    def _envelope(self):
        return upper_hull_cells([p for p, _ in self.generators], [v for _, v in self.generators])

    @property
    def points(self):
        return self._envelope[0]

    @property
    def heights(self):
        return self._envelope[1]

    @cached_property
    def cells(self):
        pts = self.points
        return tuple(hull([pts[i] for i in sorted(c)], ambient_rank=self.ambient_rank) for c in self._envelope[3])

    @cached_property
    def subdivision(self) -> Subdivision:
        return Subdivision(self.domain, self.cells, tuple(sorted({v for c in self.cells for v in c.vertices})))

    @cached_property
    def vertex_values(self) -> dict:
        """Values at the vertices of the cached subdivision (these lie on the envelope)."""
        lookup = dict(zip(self.points, self.heights))
        return {v: lookup[v] for v in self.subdivision.vertex_set}

    @cached_property
    def envelope_generators(self):
        """Generators that are vertices of the upper hull, sorted by point."""
        vv = self.vertex_values
        return tuple(sorted(vv.items()))

    @cached_property
    def affine_data(self):
        """Per cell: (gradient in chart coordinates, offset) with theta = offset + <grad, y>."""
        chart = self.domain.chart
        d = chart.dim
        vv = self.vertex_values
        out = []
        for cell in self.cells:
            chosen = []
            for v in cell.vertices:
                trial = chosen + [v]
                if affine_rank(trial) == len(trial) - 1:
                    chosen = trial
                if len(chosen) == d + 1:
                    break
            mat = [[Fraction(1)] + list(chart.project(v)) for v in chosen]
            sol = solve_generic(mat, [vv[v] for v in chosen])
            out.append((tuple(sol[1:]), sol[0]))
        return tuple(out)

    def gradients(self):
        """Cell gradients in ambient coordinates (zero on non-pivot coordinates)."""
        n = self.ambient_rank
        out = []
        for g, _ in self.affine_data:
            full = [Fraction(0)] * n
            for p, c in zip(self.domain.chart.pivots, g):
                full[p] = c
            out.append(tuple(full))
        return out

    def is_affine(self) -> bool:
        return len(self.cells) == 1

    def is_constant(self) -> bool:
        return self.is_affine() and all(value_sign(c) == 0 for c in self.affine_data[0][0])

    # -- evaluation ----------------------------------------------------
    def __call__(self, x):
        return roof_eval(self, x)

    def max_value(self):
        return vmax(self.vertex_values.values())

    def to_json(self):
        return {
            "domain": self.domain.to_json(),
            "generators": [[[str(c) for c in p], _value_to_json(v)] for p, v in self.generators],
        }

    @classmethod
    def from_json(cls, obj):
        extra = set(obj) - {"domain", "generators"}
        if extra:
            raise ValueError(f"unknown roof fields: {sorted(extra)}")
        dom = Polytope.from_json(obj["domain"]) if "domain" in obj else None
        gens = [(qpoint(p), _value_from_json(v)) for p, v in obj["generators"]]
        return cls(gens, dom)

    def __repr__(self):
        return f"RoofFn(rank={self.ambient_rank}, generators={len(self.generators)}, cells={len(self.cells)})"


def roof_eval(theta: RoofFn, x):
    x = qpoint(x)
    if not theta.domain.contains(x):
        return NEG_INF
    y = theta.domain.chart.project(x)
    for cell, (g, c) in zip(theta.cells, theta.affine_data):
        if cell.contains(x):
            return c + lincomb(y, g)
    raise AssertionError("point of the domain not covered by any cell")


def psi_eval(theta: RoofFn, u):
    """psi(u) = min_k (<x_k, u> - t_k); u may hold rationals, LogValues or floats."""
    return vmin(lincomb(p, u) - t for p, t in theta.envelope_generators)


def subdifferential_psi(theta: RoofFn, u) -> Polytope:
    vals = [(p, lincomb(p, u) - t) for p, t in theta.envelope_generators]
    m = vmin(v for _, v in vals)
    return hull([p for p, v in vals if value_sign(v - m) == 0], ambient_rank=theta.ambient_rank)


def max_over_face(theta: RoofFn, face: Polytope, witness: bool = False):
    if not face.is_face_of(theta.domain):
        raise ValueError("not a face of the roof domain")
    best_pt, best = None, None
    for p, v in sorted(theta.vertex_values.items()):
        if face.contains(p) and (best is None or value_sign(v - best) > 0):
            best_pt, best = p, v
    return (best, best_pt) if witness else best


def roof_weighted_sum(terms) -> RoofFn:
    """sum_i w_i * theta_i over a common domain, via the common refinement."""
    terms = [(as_fraction(w), th) for w, th in terms]
    if not terms:
        raise ValueError("empty weighted sum")
    dom = terms[0][1].domain
    for w, th in terms:
        if th.domain != dom:
            raise ValueError("domain mismatch in weighted sum")
        if w <= 0:
            raise ValueError("weights must be positive")
    nontrivial = [(w, th) for w, th in terms if not th.is_affine()]
    if len(nontrivial) <= 1:
        pts = sorted({v for _, th in nontrivial for v in th.subdivision.vertex_set} | set(dom.vertices))
    else:
        ref = common_refinement([th.subdivision for _, th in nontrivial])
        pts = list(ref.vertex_set)
    gens = []
    for x in pts:
        total = 0
        for w, th in terms:
            total = total + w * roof_eval(th, x)
        gens.append((x, total))
    return RoofFn(gens, dom)


def _simplex_terms(theta: RoofFn):
    vv = theta.vertex_values
    for cell in theta.cells:
        for simp in cell.simplices:
            yield simp, [vv[v] for v in simp]


def integrate(theta: RoofFn):
    """Integral of theta over its domain w.r.t. the lattice-normalized measure."""
    from .geometry import simplex_volume

    if theta.domain.dim < theta.ambient_rank:
        return Fraction(0)
    total = 0
    for simp, vals in _simplex_terms(theta):
        vol = simplex_volume(simp)
        total = total + vol / len(simp) * sum(vals[1:], vals[0])
    return total


def _positive_part_exact(simp, vals):
    from .geometry import simplex_volume

    signs = [value_sign(v) for v in vals]
    if all(s >= 0 for s in signs):
        return simplex_volume(simp) / len(simp) * sum(vals[1:], vals[0])
    if all(s <= 0 for s in signs):
        return 0
    ref = next(v for v, s in zip(vals, signs) if s > 0)
    ratios = [_ratio(v, ref) for v in vals]
    if any(r is None for r in ratios):
        raise NotExactlyRepresentable("zero level of the roof is not rational on a crossing simplex")
    pts = {}
    for x, c in zip(simp, ratios):
        if c >= 0:
            pts[x] = c
    for (x, a), (y, b) in itertools.combinations(zip(simp, ratios), 2):
        if (a > 0 > b) or (b > 0 > a):
            s = a / (a - b)
            pts[tuple(xi + s * (yi - xi) for xi, yi in zip(x, y))] = Fraction(0)
    region = hull(list(pts), ambient_rank=len(simp[0]))
    acc = Fraction(0)
    for sub in region.simplices:
        acc += simplex_volume(sub) / len(sub) * sum(pts[v] for v in sub)
    return acc * ref


def _positive_part_float(simp, vals):
    from scipy.spatial import Delaunay

    from .geometry import simplex_volume

    f = [value_float(v) for v in vals]
    X = [[float(c) for c in x] for x in simp]
    d = len(X[0])
    pts, fv = [], []
    for x, a in zip(X, f):
        if a >= 0:
            pts.append(x)
            fv.append(a)
    for (x, a), (y, b) in itertools.combinations(zip(X, f), 2):
        if (a > 0 > b) or (b > 0 > a):
            s = a / (a - b)
            pts.append([xi + s * (yi - xi) for xi, yi in zip(x, y)])
            fv.append(0.0)
    if len(pts) < d + 1:
        return 0.0
    P = np.array(pts)
    F = np.array(fv)
    if d == 1:
        lo, hi = P[:, 0].argmin(), P[:, 0].argmax()
        return float((P[hi, 0] - P[lo, 0]) * (F[hi] + F[lo]) / 2)
    tri = Delaunay(P)
    total = 0.0
    for s in tri.simplices:
        m = P[s[1:]] - P[s[0]]
        total += abs(np.linalg.det(m)) / math.factorial(d) * F[s].mean()
    return float(total)


def integrate_positive(theta: RoofFn, exact: bool = True):
    """Integral of max(0, theta).

    Exact when, on every simplex where theta changes sign, all vertex values
    are rational multiples of one another; otherwise raises
    :class:`NotExactlyRepresentable` (or returns a float if ``exact=False``).
    """
    if theta.domain.dim < theta.ambient_rank:
        return Fraction(0)
    if theta.is_numeric:
        exact = False
    total = 0
    fallback = 0.0
    for simp, vals in _simplex_terms(theta):
        if exact:
            total = total + _positive_part_exact(simp, vals)
        else:
            try:
                if theta.is_numeric:
                    raise NotExactlyRepresentable
                fallback += value_float(_positive_part_exact(simp, vals))
            except NotExactlyRepresentable:
                fallback += _positive_part_float(simp, vals)
    return total if exact else fallback


# ---------------------------------------------------------------------------
# the psi side


@dataclass(frozen=True)
class PACell:
    """Pointed polyhedron {u : <n_k, u> >= o_k} carrying psi(u) = <gradient, u> + offset."""

    normals: tuple
    offsets: tuple
    gradient: tuple
    offset: object

    def contains(self, u) -> bool:
        return all(value_sign(lincomb(n, u) - o) >= 0 for n, o in zip(self.normals, self.offsets))

    def value(self, u):
        return lincomb(self.gradient, u) + self.offset

    @cached_property
    def rays(self):
        d = len(self.gradient)
        if rank(list(self.normals)) < d:
            raise ValueError("cell is not pointed")
        if d == 1:
            out = []
            for r in ((1,), (-1,)):
                if all(_dot(n, r) >= 0 for n in self.normals):
                    out.append(r)
            return tuple(out)
        return tuple(extreme_rays(list(self.normals)))

    @cached_property
    def vertices(self):
        d = len(self.gradient)
        found = []
        for idx in itertools.combinations(range(len(self.normals)), d):
            mat = [self.normals[i] for i in idx]
            if rank(mat) < d:
                continue
            u = tuple(solve_generic(mat, [self.offsets[i] for i in idx]))
            if self.contains(u) and u not in found:
                found.append(u)
        return tuple(found)


class CellwisePA:
    """Piecewise-affine function on a complete subdivision of N_R into pointed cells."""

    def __init__(self, ambient_rank, cells):
        self.ambient_rank = ambient_rank
        self.cells = tuple(cells)
        for c in self.cells:
            if len(c.gradient) != ambient_rank or any(len(n) != ambient_rank for n in c.normals):
                raise ValueError("cell data of the wrong dimension")
            c.rays  # pointedness check

    # -- constructors --------------------------------------------------
    @classmethod
    def from_1d(cls, breakpoints, slopes, value):
        """psi on R with rational breakpoints b_1 < ... < b_m, slopes s_0..s_m and psi(b_1) = value."""
        b = [as_fraction(x) for x in breakpoints]
        s = [as_fraction(x) for x in slopes]
        if len(s) != len(b) + 1 or not b:
            raise ValueError("need one more slope than breakpoints")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError("breakpoints must increase")
        vals = [value]
        for i in range(1, len(b)):
            vals.append(vals[-1] + s[i] * (b[i] - b[i - 1]))
        cells = [PACell(((Fraction(-1),),), (-b[0],), (s[0],), vals[0] - s[0] * b[0])]
        for i in range(len(b) - 1):
            cells.append(
                PACell(((Fraction(1),), (Fraction(-1),)), (b[i], -b[i + 1]), (s[i + 1],), vals[i] - s[i + 1] * b[i])
            )
        cells.append(PACell(((Fraction(1),),), (b[-1],), (s[-1],), vals[-1] - s[-1] * b[-1]))
        return cls(1, cells)

    @classmethod
    def from_affine_min(cls, pieces):
        """Concave psi(u) = min_k (<a_k, u> + b_k)."""
        return roof_to_cellwise(RoofFn([(a, -b) for a, b in pieces]))

    # -- evaluation and structure ---------------------------------------
    def __call__(self, u):
        for c in self.cells:
            if c.contains(u):
                return c.value(u)
        raise ValueError("point not covered by any cell")

    @cached_property
    def stability_polytope(self) -> Polytope:
        n = self.ambient_rank
        grads = []
        for c in self.cells:
            if c.rays and rank(list(c.rays)) == n:
                grads.append(c.gradient)
        if not grads:
            raise StabilityDefect("unbounded stability defect: no full-dimensional recession cone")
        return hull(grads, ambient_rank=n)

    def check_recession(self):
        delta = self.stability_polytope
        for c in self.cells:
            for r in c.rays:
                support = min(_dot(x, r) for x in delta.vertices)
                if _dot(c.gradient, r) != support:
                    raise StabilityDefect(
                        f"unbounded stability defect: slope {_dot(c.gradient, r)} along ray {r}, expected {support}"
                    )
        return delta

    def is_concave(self) -> bool:
        for c2 in self.cells:
            for v in c2.vertices:
                here = c2.value(v)
                for c in self.cells:
                    if value_sign(c.value(v) - here) < 0:
                        return False
            for r in c2.rays:
                slope = _dot(c2.gradient, r)
                for c in self.cells:
                    if _dot(c.gradient, r) < slope:
                        return False
        return True

    def vertices(self):
        out = []
        for c in self.cells:
            for v in c.vertices:
                if v not in out:
                    out.append(v)
        return out

    def to_json(self):
        return {
            "ambient_rank": self.ambient_rank,
            "cells": [
                {
                    "normals": [[str(x) for x in n] for n in c.normals],
                    "offsets": [_value_to_json(o) for o in c.offsets],
                    "gradient": [str(x) for x in c.gradient],
                    "offset": _value_to_json(c.offset),
                }
                for c in self.cells
            ],
        }

    @classmethod
    def from_json(cls, obj):
        extra = set(obj) - {"ambient_rank", "cells"}
        if extra:
            raise ValueError(f"unknown psi fields: {sorted(extra)}")
        cells = []
        for c in obj["cells"]:
            if set(c) - {"normals", "offsets", "gradient", "offset"}:
                raise ValueError(f"unknown cell fields: {sorted(set(c) - {'normals', 'offsets', 'gradient', 'offset'})}")
            cells.append(
                PACell(
                    tuple(qpoint(n) for n in c["normals"]),
                    tuple(_value_from_json(o) for o in c["offsets"]),
                    qpoint(c["gradient"]),
                    _value_from_json(c["offset"]),
                )
            )
        return cls(int(obj["ambient_rank"]), cells)


def _is_rational_point(u) -> bool:
    return all(not isinstance(c, LogValue) or c.is_rational() for c in u)


def _rational(c):
    return c.const if isinstance(c, LogValue) else as_fraction(c)


def dual_cellwise_to_roof(psi: CellwisePA) -> RoofFn:
    """theta = psi^vee as a generator-form roof on the stability polytope."""
    delta = psi.check_recession()
    if psi.is_concave():
        gens = [(c.gradient, -c.offset) for c in psi.cells]
        return RoofFn(gens, delta)
    if delta.dim < psi.ambient_rank:
        raise NotExactlyRepresentable("non-concave psi over a lower-dimensional polytope is not supported")
    verts = psi.vertices()
    if not all(_is_rational_point(u) for u in verts):
        raise NotExactlyRepresentable("non-concave psi with irrational breakpoints has no exact roof")
    verts = [tuple(_rational(c) for c in u) for u in verts]
    # theta(x) = min_j <x, u_j> - psi(u_j) on delta: enumerate vertices of its hypograph
    affines = [(u, -psi(u)) for u in verts]
    n = psi.ambient_rank
    cons = [("f", nrm, off) for nrm, off in delta.facets]
    cons += [("a", u, b) for u, b in affines]
    gens = {}
    for combo in itertools.combinations(range(len(cons)), n + 1):
        kinds = [cons[i][0] for i in combo]
        if "a" not in kinds:
            continue
        # rows over (x, t): facet  <nrm, x> = off ; affine  t - <u, x> = b
        mat, rhs = [], []
        for i in combo:
            kind, a, b = cons[i]
            if kind == "f":
                mat.append(list(a) + [Fraction(0)])
            else:
                mat.append([-c for c in a] + [Fraction(1)])
            rhs.append(b)
        if rank(mat) < n + 1:
            continue
        sol = solve_generic(mat, rhs)
        x = tuple(_rational(c) if isinstance(c, LogValue) and c.is_rational() else c for c in sol[:n])
        if not all(isinstance(c, Fraction) or isinstance(c, int) for c in x):
            raise NotExactlyRepresentable("hypograph vertex with irrational coordinates")
        x = qpoint(x)
        if x in gens or not delta.contains(x):
            continue
        t = sol[n]
        if all(value_sign(lincomb(x, u) + b - t) >= 0 for u, b in affines):
            gens[x] = t
    return RoofFn(sorted(gens.items()), delta)


def roof_to_cellwise(theta: RoofFn) -> CellwisePA:
    """psi = theta^vee as a cellwise function: one cell per upper-hull vertex."""
    if theta.domain.dim < theta.ambient_rank:
        raise ValueError("cellwise form needs a full-dimensional domain")
    gens = theta.envelope_generators
    cells = []
    for k, (xk, tk) in enumerate(gens):
        normals, offsets = [], []
        for l, (xl, tl) in enumerate(gens):
            if l == k:
                continue
            normals.append(tuple(a - b for a, b in zip(xl, xk)))
            offsets.append(tl - tk)
        if not normals:  # single generator only happens for a point domain
            raise ValueError("cellwise form needs a full-dimensional domain")
        cells.append(PACell(tuple(normals), tuple(offsets), xk, -tk))
    return CellwisePA(theta.ambient_rank, cells)


def concavify(psi: CellwisePA) -> CellwisePA:
    return roof_to_cellwise(dual_cellwise_to_roof(psi))
