"""Exact rational polyhedral geometry.

Polytopes are kept in both V- and H-representation. Everything is computed
with Fractions and Python integers; floats only appear in the candidate
prefilter of :func:`upper_hull_subdivision`, whose survivors are re-checked
exactly.

Lower-dimensional polytopes are handled through a pivot-coordinate chart:
the affine hull is the graph of an affine map over a subset of coordinates,
so projecting onto those coordinates is injective on it and keeps facet
normals rational.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .exactnum import as_fraction, value_float, value_sign

__all__ = [
    "Chart",
    "Polytope",
    "Subdivision",
    "affine_rank",
    "common_refinement",
    "extreme_rays",
    "faces",
    "hull",
    "inverse",
    "lattice_points",
    "normalized_volume",
    "qpoint",
    "simplex_volume",
    "solve_generic",
    "triangulate",
    "upper_hull_subdivision",
    "upper_hull_cells",
    "vertex_enumeration",
]

MAX_AMBIENT_RANK = 8


def qpoint(seq) -> tuple:
    return tuple(as_fraction(c) for c in seq)


# ---------------------------------------------------------------------------
# exact linear algebra


def rref(rows):
    """Reduced row echelon form over Q. Returns (nonzero rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]], pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def affine_rank(points) -> int:
    """Dimension of the affine hull of a nonempty point list."""
    p0 = points[0]
    return rank([tuple(a - b for a, b in zip(p, p0)) for p in points[1:]]) if len(points) > 1 else 0


def inverse(a):
    """Inverse of a square Fraction matrix (ValueError if singular)."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [v * inv for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def det(a) -> Fraction:
    m = [list(map(Fraction, row)) for row in a]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def lincomb(coeffs, values):
    """sum(c * v) for rational c and values of any kind (LogValue, Fraction, float)."""
    acc = 0
    for c, v in zip(coeffs, values):
        if c:
            acc = acc + c * v
    return acc


def solve_generic(a, b):
    """Solve a x = b with rational square ``a`` and right-hand side of any value kind."""
    ainv = inverse(a)
    return [lincomb(row, b) for row in ainv]


def _int_row(row) -> tuple:
    row = [Fraction(x) for x in row]
    den = 1
    for x in row:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in row]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# double description


def extreme_rays(rows):
    """Extreme rays of the pointed cone ``{y : <row, y> >= 0 for all rows}``.

    Rows are rational vectors; rays are returned as primitive integer tuples.
    Raises ValueError if the cone is not pointed.
    """
    rows = [r for r in (_int_row(r) for r in rows) if any(r)]
    if not rows:
        raise ValueError("cone is not pointed")
    d = len(rows[0])
    basis = []
    echelon = []
    for i, r in enumerate(rows):
        if rank(echelon + [r]) > len(echelon):
            echelon.append(r)
            basis.append(i)
            if len(basis) == d:
                break
    if len(basis) < d:
        raise ValueError("cone is not pointed")
    binv = inverse([rows[i] for i in basis])
    rays = []
    zeros = []
    for j in range(d):
        col = _int_row([binv[i][j] for i in range(d)])
        rays.append(col)
        zeros.append(sum(1 << basis[k] for k in range(d) if k != j))
    done = set(basis)
    for idx, a in enumerate(rows):
        if idx in done:
            continue
        bit = 1 << idx
        vals = [_dot(a, r) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        new_rays, new_zeros = [], []
        for k, v in enumerate(vals):
            if v > 0:
                new_rays.append(rays[k])
                new_zeros.append(zeros[k])
            elif v == 0:
                new_rays.append(rays[k])
                new_zeros.append(zeros[k] | bit)
        for p in pos:
            for q in neg:
                common = zeros[p] & zeros[q]
                if bin(common).count("1") < d - 2:
                    continue
                if any(
                    k != p and k != q and (zeros[k] & common) == common for k in range(len(rays))
                ):
                    continue
                sp, sq = vals[p], vals[q]
                v = tuple(sp * x - sq * y for x, y in zip(rays[q], rays[p]))
                new_rays.append(_int_row(v))
                new_zeros.append(common | bit)
        rays, zeros = new_rays, new_zeros
        done.add(idx)
    return rays


def vertex_enumeration(normals, offsets):
    """Vertices of the bounded polyhedron ``{x : <n_k, x> >= o_k}`` (rational data)."""
    if not normals:
        return []
    d = len(normals[0])
    rows = [tuple(n) + (-Fraction(o),) for n, o in zip(normals, offsets)]
    rows.append(tuple([0] * d) + (1,))
    try:
        rays = extreme_rays(rows)
    except ValueError:
        return []
    out = []
    for r in rays:
        s = r[-1]
        if s > 0:
            out.append(tuple(Fraction(x, s) for x in r[:-1]))
    return sorted(set(out))


# ---------------------------------------------------------------------------
# charts and polytopes


@dataclass(frozen=True)
class Chart:
    """Affine bijection between an affine subspace and Q^dim via pivot coordinates."""

    origin: tuple
    pivots: tuple
    basis: tuple

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def project(self, x) -> tuple:
        return tuple(x[p] for p in self.pivots)

    def lift(self, y) -> tuple:
        x = list(self.origin)
        for yi, p, b in zip(y, self.pivots, self.basis):
            t = yi - self.origin[p]
            if t:
                x = [xc + t * bc for xc, bc in zip(x, b)]
        return tuple(x)

    def equations(self):
        """Affine hull as equations ``<normal, x> = offset``."""
        n = len(self.origin)
        eqs = []
        for c in range(n):
            if c in self.pivots:
                continue
            normal = [Fraction(0)] * n
            normal[c] = Fraction(1)
            for p, b in zip(self.pivots, self.basis):
                normal[p] -= b[c]
            eqs.append((tuple(normal), _dot(normal, self.origin)))
        return tuple(eqs)


def affine_chart(points) -> Chart:
    p0 = points[0]
    diffs = [tuple(a - b for a, b in zip(p, p0)) for p in points[1:]]
    basis, pivots = rref(diffs) if diffs else ([], [])
    return Chart(tuple(p0), tuple(pivots), tuple(basis))


class Polytope:
    """Rational polytope with irredundant vertices and facet inequalities.

    ``facets`` holds pairs (normal, offset) meaning ``<normal, x> >= offset``;
    ``equations`` cut out the affine hull when the polytope is not full
    dimensional. Use :func:`hull` to build one.
    """

    def __init__(self, ambient_rank, vertices, chart, chart_facets):
        self.ambient_rank = ambient_rank
        self.vertices = tuple(vertices)
        self.chart = chart
        self.dim = chart.dim
        # facets in chart coordinates: (normal over pivots, offset)
        self.chart_facets = tuple(chart_facets)
        self._vindex = {v: i for i, v in enumerate(self.vertices)}

    # -- representations -----------------------------------------------
    @cached_property
    def facets(self):
        out = []
        for normal, off in self.chart_facets:
            full = [Fraction(0)] * self.ambient_rank
            for p, c in zip(self.chart.pivots, normal):
                full[p] = Fraction(c)
            out.append((tuple(full), Fraction(off)))
        return tuple(out)

    @cached_property
    def equations(self):
        return self.chart.equations()

    @cached_property
    def halfspaces(self):
        """All inequalities including both sides of each equation."""
        hs = list(self.facets)
        for n, o in self.equations:
            hs.append((n, o))
            hs.append((tuple(-c for c in n), -o))
        return tuple(hs)

    @cached_property
    def chart_vertices(self):
        return tuple(self.chart.project(v) for v in self.vertices)

    @cached_property
    def facet_vertex_sets(self):
        out = []
        for normal, off in self.chart_facets:
            out.append(frozenset(i for i, y in enumerate(self.chart_vertices) if _dot(normal, y) == off))
        return tuple(out)

    def contains(self, x) -> bool:
        for n, o in self.equations:
            if _dot(n, x) != o:
                return False
        y = self.chart.project(x)
        return all(_dot(n, y) >= o for n, o in self.chart_facets)

    def relative_interior_contains(self, x) -> bool:
        if not self.contains(x):
            return False
        y = self.chart.project(x)
        return all(_dot(n, y) > o for n, o in self.chart_facets)

    # -- faces ---------------------------------------------------------
    def _set_dim(self, s) -> int:
        return affine_rank([self.chart_vertices[i] for i in sorted(s)])

    @cached_property
    def _faces_by_dim(self):
        allv = frozenset(range(len(self.vertices)))
        levels = {self.dim: {allv}}
        for k in range(self.dim - 1, -1, -1):
            found = set()
            for f in levels[k + 1]:
                for g in self.facet_vertex_sets:
                    s = f & g
                    if s and s != f and s not in found and self._set_dim(s) == k:
                        found.add(s)
            levels[k] = found
        return {k: sorted(v, key=lambda s: sorted(s)) for k, v in levels.items()}

    def face_vertex_sets(self, d):
        if not 0 <= d <= self.dim:
            raise ValueError(f"face dimension {d} out of range 0..{self.dim}")
        return list(self._faces_by_dim[d])

    def faces(self, d):
        return [Polytope._from_vertex_subset(self, s) for s in self.face_vertex_sets(d)]

    @staticmethod
    def _from_vertex_subset(p, s):
        return hull([p.vertices[i] for i in sorted(s)], ambient_rank=p.ambient_rank)

    def is_face_of(self, other: "Polytope") -> bool:
        if self.ambient_rank != other.ambient_rank or self.dim > other.dim:
            return False
        idx = set()
        for v in self.vertices:
            if v not in other._vindex:
                return False
            idx.add(other._vindex[v])
        return frozenset(idx) in set(other._faces_by_dim[self.dim])

    # -- measures ------------------------------------------------------
    def _pull_simplices(self, s):
        """Pulling triangulation of the face with vertex-index set ``s``."""
        k = self._set_dim(s)
        if k == 0:
            return [(min(s, key=lambda i: self.vertices[i]),)]
        v0 = min(s, key=lambda i: self.vertices[i])
        out = []
        for f in self._subfacets(s, k):
            if v0 in f:
                continue
            for simp in self._pull_simplices(f):
                out.append((v0,) + simp)
        return out

    def _subfacets(self, s, k):
        found = []
        for g in self.facet_vertex_sets:
            t = s & g
            if t and t != s and t not in found and self._set_dim(t) == k - 1:
                found.append(t)
        return found

    @cached_property
    def simplices(self):
        """Pulling triangulation as tuples of vertices (ambient coordinates)."""
        if not self.vertices:
            return ()
        allv = frozenset(range(len(self.vertices)))
        return tuple(tuple(self.vertices[i] for i in simp) for simp in self._pull_simplices(allv))

    def volume(self) -> Fraction:
        """Lattice-normalized volume; zero unless full dimensional."""
        if self.dim < self.ambient_rank:
            return Fraction(0)
        return sum((simplex_volume(s) for s in self.simplices), Fraction(0))

    # -- misc ----------------------------------------------------------
    def bbox(self):
        lo = tuple(min(v[i] for v in self.vertices) for i in range(self.ambient_rank))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(self.ambient_rank))
        return lo, hi

    def __eq__(self, other):
        return (
            isinstance(other, Polytope)
            and self.ambient_rank == other.ambient_rank
            and self.vertices == other.vertices
        )

    def __hash__(self):
        return hash((self.ambient_rank, self.vertices))

    def __repr__(self):
        vs = ", ".join("(" + ",".join(str(c) for c in v) + ")" for v in self.vertices)
        return f"Polytope(dim={self.dim}, vertices=[{vs}])"

    def to_json(self):
        return {
            "ambient_rank": self.ambient_rank,
            "vertices": [[str(c) for c in v] for v in self.vertices],
        }

    @classmethod
    def from_json(cls, obj):
        if set(obj) - {"ambient_rank", "vertices"}:
            raise ValueError(f"unknown polytope fields: {sorted(set(obj) - {'ambient_rank', 'vertices'})}")
        verts = [qpoint(v) for v in obj["vertices"]]
        return hull(verts, ambient_rank=obj.get("ambient_rank"))


def simplex_volume(vertices) -> Fraction:
    v0 = vertices[0]
    n = len(v0)
    if len(vertices) != n + 1:
        return Fraction(0)
    m = [[a - b for a, b in zip(v, v0)] for v in vertices[1:]]
    return abs(det(m)) / math.factorial(n)


def hull(points, ambient_rank=None) -> Polytope:
    """Convex hull of a nonempty list of rational points."""
    pts = sorted(set(qpoint(p) for p in points))
    if not pts:
        raise ValueError("hull of an empty point set")
    n = len(pts[0]) if ambient_rank is None else ambient_rank
    if any(len(p) != n for p in pts):
        raise ValueError("points of mixed dimension")
    if n > MAX_AMBIENT_RANK:
        raise ValueError(f"ambient rank {n} exceeds the supported maximum {MAX_AMBIENT_RANK}")
    chart = affine_chart(pts)
    d = chart.dim
    ys = [chart.project(p) for p in pts]
    if d == 0:
        return Polytope(n, pts[:1], chart, ())
    if d == 1:
        lo = min(range(len(pts)), key=lambda i: ys[i][0])
        hi = max(range(len(pts)), key=lambda i: ys[i][0])
        facets = [((Fraction(1),), ys[lo][0]), ((Fraction(-1),), -ys[hi][0])]
        return Polytope(n, sorted([pts[lo], pts[hi]]), chart, facets)
    rays = extreme_rays([y + (1,) for y in ys])
    facets = []
    for r in rays:
        a = tuple(Fraction(c) for c in r[:-1])
        facets.append((a, Fraction(-r[-1])))
    facets.sort()
    verts = []
    for p, y in zip(pts, ys):
        tight = [a for a, o in facets if _dot(a, y) == o]
        if len(tight) >= d and rank(tight) == d:
            verts.append(p)
    return Polytope(n, verts, chart, facets)


def faces(p: Polytope, d: int):
    return p.faces(d)


def lattice_points(p: Polytope):
    """All integer points of ``p`` by bounding-box scan."""
    lo, hi = p.bbox()
    ranges = [range(math.ceil(a), math.floor(b) + 1) for a, b in zip(lo, hi)]
    out = []
    for x in itertools.product(*ranges):
        q = tuple(Fraction(c) for c in x)
        if p.contains(q):
            out.append(q)
    return out


def normalized_volume(p: Polytope) -> Fraction:
    return p.volume()


# ---------------------------------------------------------------------------
# subdivisions


@dataclass(frozen=True)
class Subdivision:
    base: Polytope
    cells: tuple
    vertex_set: tuple

    @classmethod
    def from_cells(cls, base, cells):
        cells = tuple(sorted(cells, key=lambda c: c.vertices))
        verts = sorted({v for c in cells for v in c.vertices})
        return cls(base, cells, tuple(verts))

    def to_json(self):
        return {"base": self.base.to_json(), "cells": [c.to_json() for c in self.cells]}


def _dedupe_lifted(points, heights):
    best = {}
    for p, h in zip(points, heights):
        if p not in best or value_sign(h - best[p]) > 0:
            best[p] = h
    pts = sorted(best)
    return pts, [best[p] for p in pts]


def upper_hull_cells(points, heights):
    """Maximal cells of the regular subdivision induced by lifting ``points``.

    Returns ``(pts, hs, chart, cells)`` where pts/hs are the deduplicated
    lifted points and each cell is the frozenset of indices of points lying
    on that upper facet (including non-vertex points on the facet).
    """
    pts, hs = _dedupe_lifted([qpoint(p) for p in points], list(heights))
    chart = affine_chart(pts)
    d = chart.dim
    ys = [chart.project(p) for p in pts]
    n = len(pts)
    if d == 0:
        return pts, hs, chart, [frozenset([0])]

    combos = list(itertools.combinations(range(n), d + 1))
    X = np.array([[float(c) for c in y] for y in ys], dtype=float)
    H = np.array([value_float(h) for h in hs], dtype=float)
    cidx = np.array(combos, dtype=int)
    mats = np.concatenate([np.ones((len(combos), d + 1, 1)), X[cidx]], axis=2)  # rows [1, x_i]
    dets = np.linalg.det(mats)
    scale = max(1.0, float(np.abs(X).max()) if X.size else 1.0) ** d
    ok = np.abs(dets) > 1e-10 * scale
    tol = 1e-9 * (1.0 + float(np.abs(H).max()))
    candidates = {}
    if ok.any():
        good = np.nonzero(ok)[0]
        mt = np.transpose(mats[good], (0, 2, 1))
        q = np.concatenate([np.ones((1, n)), X.T], axis=0)
        lam = np.linalg.solve(mt, np.broadcast_to(q, (len(good), d + 1, n)))
        f = np.einsum("kin,ki->kn", lam, H[cidx[good]])
        resid = f - H[None, :]
        feasible = resid.min(axis=1) >= -tol
        for k in np.nonzero(feasible)[0]:
            key = frozenset(np.nonzero(np.abs(resid[k]) <= tol)[0].tolist())
            candidates.setdefault(key, combos[good[k]])

    cells = set()
    for combo in candidates.values():
        mat = [[Fraction(1)] + list(ys[i]) for i in combo]
        try:
            minv = inverse([list(col) for col in zip(*mat)])
        except ValueError:
            continue
        zero = set()
        valid = True
        for j in range(n):
            rhs = (Fraction(1),) + ys[j]
            lamj = [_dot(row, rhs) for row in minv]
            s = value_sign(lincomb(lamj, [hs[i] for i in combo]) - hs[j])
            if s < 0:
                valid = False
                break
            if s == 0:
                zero.add(j)
        if valid:
            cells.add(frozenset(zero))
    return pts, hs, chart, sorted(cells, key=sorted)


def upper_hull_subdivision(lifted) -> Subdivision:
    """Regular subdivision of conv(points) from the upper faces of the lifted points."""
    points = [p for p, _ in lifted]
    heights = [h for _, h in lifted]
    pts, _, _, cells = upper_hull_cells(points, heights)
    base = hull(pts)
    return Subdivision.from_cells(base, [hull([pts[i] for i in sorted(c)]) for c in cells])


def _intersect_cells(a: Polytope, b: Polytope, chart: Chart):
    (alo, ahi), (blo, bhi) = a.bbox(), b.bbox()
    for i in range(a.ambient_rank):
        if max(alo[i], blo[i]) > min(ahi[i], bhi[i]):
            return None
    normals = [n for n, _ in a.chart_facets] + [n for n, _ in b.chart_facets]
    offsets = [o for _, o in a.chart_facets] + [o for _, o in b.chart_facets]
    ys = vertex_enumeration(normals, offsets)
    if len(ys) <= chart.dim or affine_rank(ys) < chart.dim:
        return None
    return hull([chart.lift(y) for y in ys], ambient_rank=a.ambient_rank)


def common_refinement(subs) -> Subdivision:
    """Coarsest common refinement: all full-dimensional cell intersections."""
    subs = list(subs)
    if not subs:
        raise ValueError("no subdivisions to refine")
    base = subs[0].base
    for s in subs[1:]:
        if s.base != base:
            raise ValueError("base mismatch: subdivisions cover different polytopes")
    cells = list(subs[0].cells)
    chart = base.chart
    if base.dim == 0:
        return Subdivision.from_cells(base, cells)
    for s in subs[1:]:
        if len(s.cells) == 1:
            continue
        if len(cells) == 1:
            cells = list(s.cells)
            continue
        new = []
        for a in cells:
            for b in s.cells:
                c = _intersect_cells(a, b, chart)
                if c is not None:
                    new.append(c)
        cells = new
    return Subdivision.from_cells(base, cells)


def triangulate(s: Subdivision) -> Subdivision:
    """Pulling triangulation of every cell (cone from the lexicographically smallest vertex)."""
    cells = []
    for c in s.cells:
        if len(c.vertices) == c.dim + 1:
            cells.append(c)
        else:
            cells.extend(hull(list(simp), ambient_rank=c.ambient_rank) for simp in c.simplices)
    return Subdivision.from_cells(s.base, cells)
