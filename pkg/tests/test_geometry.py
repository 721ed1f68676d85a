import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from toricroof.exactnum import LogValue, value_sign
from toricroof.geometry import (
    Polytope,
    Subdivision,
    common_refinement,
    hull,
    lattice_points,
    normalized_volume,
    triangulate,
    upper_hull_subdivision,
)

F = Fraction
L2 = LogValue.log(2)
SQUARE = hull([(0, 0), (1, 0), (0, 1), (1, 1)])


def simplex(n, scale=1):
    pts = [tuple([0] * n)]
    for i in range(n):
        e = [0] * n
        e[i] = scale
        pts.append(tuple(e))
    return hull(pts)


@st.composite
def lattice_polytopes(draw, max_rank=3, box=3):
    n = draw(st.integers(1, max_rank))
    pts = draw(st.lists(st.tuples(*[st.integers(0, box)] * n), min_size=1, max_size=n + 4))
    return hull(pts, ambient_rank=n)


def in_hull_lp(points, x):
    """Membership oracle: x is a convex combination of the points (float LP)."""
    P = np.array(points, dtype=float).T
    k = P.shape[1]
    A = np.vstack([P, np.ones(k)])
    b = np.append(np.array(x, dtype=float), 1.0)
    res = linprog(np.zeros(k), A_eq=A, b_eq=b, bounds=[(0, None)] * k, method="highs")
    return res.status == 0


def polygon_edges_bruteforce(verts):
    """Pairs of vertices with every other vertex weakly on one side of their line."""
    edges = 0
    for a, b in itertools.combinations(verts, 2):
        sides = set()
        for c in verts:
            if c in (a, b):
                continue
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            sides.add((cross > 0) - (cross < 0))
        if not (1 in sides and -1 in sides):
            edges += 1
    return edges


def upper_hull_1d(xs, hs):
    """Kept points of a 1-D upper hull by pairwise slope comparison."""
    keep = []
    for k in range(len(xs)):
        below = False
        for i in range(len(xs)):
            for j in range(len(xs)):
                if xs[i] < xs[k] < xs[j]:
                    t = F(xs[k] - xs[i], xs[j] - xs[i])
                    if value_sign(hs[i] * (1 - t) + hs[j] * t - hs[k]) >= 0:
                        below = True
        if not below:
            keep.append(xs[k])
    return keep


# -- hull --------------------------------------------------------------------


def test_hull_drops_interior_point():
    p = hull([(0, 0), (1, 0), (0, 1), (1, 1), (F(1, 2), F(1, 2))])
    assert len(p.vertices) == 4
    assert p == SQUARE


def test_standard_simplex_and_segment():
    s = simplex(3)
    assert len(s.vertices) == 4 and s.dim == 3
    seg = hull([(0,), (3,)])
    assert seg.vertices == ((F(0),), (F(3),))


def test_lower_dimensional_hull():
    tri = hull([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert tri.dim == 2 and tri.ambient_rank == 3
    assert tri.contains((F(1, 3), F(1, 3), F(1, 3)))
    assert not tri.contains((F(1, 3), F(1, 3), F(1, 4)))
    assert normalized_volume(tri) == 0


def test_vertex_and_halfspace_agree_on_cube():
    cube = hull(list(itertools.product([0, 1], repeat=3)))
    assert [len(cube.faces(d)) for d in range(4)] == [8, 12, 6, 1]
    for x in itertools.product([F(-1, 2), 0, F(1, 2), 1, F(3, 2)], repeat=3):
        inside = all(0 <= c <= 1 for c in x)
        assert cube.contains(x) == inside


# -- faces -------------------------------------------------------------------


def test_square_edges_and_triangle_vertices():
    assert len(SQUARE.faces(1)) == 4
    assert sorted(f.vertices[0] for f in simplex(2).faces(0)) == [(0, 0), (0, 1), (1, 0)]


def test_bundle_quadrilateral_edges_bruteforce():
    # the polytope of O(1) + O(2) over P^1: x, y >= 0 with the y-dependent top edge
    quad = hull([(0, 0), (1, 0), (0, 1), (2, 1)])
    assert len(quad.faces(1)) == polygon_edges_bruteforce(list(quad.vertices)) == 4


def test_face_dimension_out_of_range():
    with pytest.raises(ValueError):
        SQUARE.faces(3)


@given(lattice_polytopes())
def test_euler_relation(p):
    assert sum((-1) ** d * len(p.faces(d)) for d in range(p.dim + 1)) == 1


@given(lattice_polytopes(max_rank=2))
def test_polygon_edges_match_bruteforce(p):
    if p.dim == 2:
        assert len(p.faces(1)) == polygon_edges_bruteforce(list(p.vertices))


# -- lattice points and volume ----------------------------------------------


def test_lattice_point_counts():
    assert len(lattice_points(SQUARE)) == 4
    assert sorted(lattice_points(simplex(2))) == [(0, 0), (0, 1), (1, 0)]
    assert len(lattice_points(simplex(2, 2))) == (2 + 1) * (2 + 2) // 2


@given(lattice_polytopes(max_rank=3, box=2))
def test_lattice_points_match_lp_membership(p):
    got = set(lattice_points(p))
    verts = [tuple(float(c) for c in v) for v in p.vertices]
    for x in itertools.product(range(3), repeat=p.ambient_rank):
        if p.dim == p.ambient_rank:
            assert (tuple(F(c) for c in x) in got) == in_hull_lp(verts, x)
    for x in got:
        assert all(sum(a * b for a, b in zip(n, x)) >= o for n, o in p.halfspaces)


def test_volume_examples():
    assert normalized_volume(SQUARE) == 1
    assert normalized_volume(hull([(0, 0), (3, 0), (0, 3), (3, 3)])) == 9


def test_simplex_volumes():
    import math

    for n in range(1, 5):
        assert normalized_volume(simplex(n)) == F(1, math.factorial(n))


@given(lattice_polytopes(max_rank=3, box=3))
def test_volume_matches_qhull(p):
    if p.dim == p.ambient_rank and p.ambient_rank >= 2:
        ref = ConvexHull(np.array(p.vertices, dtype=float)).volume
        assert abs(float(normalized_volume(p)) - ref) < 1e-9


# -- subdivisions -------------------------------------------------------------


def test_intro_cubic_two_adic_subdivision():
    xs = [0, 1, 2, 3]
    hs = [LogValue(), -2 * L2, LogValue(), L2]
    s = upper_hull_subdivision([((x,), h) for x, h in zip(xs, hs)])
    kept = upper_hull_1d(xs, hs)
    assert kept == [0, 3]
    assert [c.vertices for c in s.cells] == [((F(0),), (F(3),))]


def test_flat_lift_gives_trivial_subdivision():
    pts = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)]
    s = upper_hull_subdivision([(p, LogValue()) for p in pts])
    assert len(s.cells) == 1 and s.cells[0] == hull(pts)


def test_quadric_two_adic_diagonal():
    lifts = [((0, 0), LogValue()), ((1, 0), -L2), ((0, 1), -2 * L2), ((1, 1), LogValue())]
    s = upper_hull_subdivision(lifts)
    cells = sorted(tuple(c.vertices) for c in s.cells)
    assert cells == sorted([
        tuple(sorted([(F(0), F(0)), (F(1), F(0)), (F(1), F(1))])),
        tuple(sorted([(F(0), F(0)), (F(0), F(1)), (F(1), F(1))])),
    ])


def split_segment(at, length=3):
    base = hull([(0,), (length,)])
    pts = [0] + list(at) + [length]
    return Subdivision.from_cells(base, [hull([(a,), (b,)]) for a, b in zip(pts, pts[1:])])


def diagonal_split(main=True):
    if main:
        cells = [hull([(0, 0), (1, 0), (1, 1)]), hull([(0, 0), (0, 1), (1, 1)])]
    else:
        cells = [hull([(0, 0), (1, 0), (0, 1)]), hull([(1, 0), (0, 1), (1, 1)])]
    return Subdivision.from_cells(SQUARE, cells)


def test_refinement_with_trivial():
    s = split_segment([1])
    assert common_refinement([s, split_segment([])]).cells == s.cells


def test_refinement_of_segments():
    r = common_refinement([split_segment([1]), split_segment([2])])
    assert [c.vertices for c in r.cells] == [((F(0),), (F(1),)), ((F(1),), (F(2),)), ((F(2),), (F(3),))]


def test_refinement_of_opposite_diagonals():
    r = common_refinement([diagonal_split(True), diagonal_split(False)])
    assert len(r.cells) == 4
    assert (F(1, 2), F(1, 2)) in r.vertex_set
    assert sum(normalized_volume(c) for c in r.cells) == 1


def test_refinement_base_mismatch():
    with pytest.raises(ValueError):
        common_refinement([split_segment([1]), split_segment([1], length=4)])


def test_triangulate_examples():
    t = triangulate(Subdivision.from_cells(SQUARE, [SQUARE]))
    assert len(t.cells) == 2
    tri = simplex(2)
    assert triangulate(Subdivision.from_cells(tri, [tri])).cells == (tri,)
    four = common_refinement([diagonal_split(True), diagonal_split(False)])
    assert triangulate(four).cells == four.cells


@st.composite
def lifted_configs(draw):
    n = draw(st.integers(1, 2))
    pts = draw(st.lists(st.tuples(*[st.integers(0, 3)] * n), min_size=n + 1, max_size=7, unique=True))
    hs = [LogValue(draw(st.integers(-3, 3)), {2: draw(st.integers(-2, 2))}) for _ in pts]
    return list(zip(pts, hs))


@given(lifted_configs())
def test_subdivision_volume_additivity(lifted):
    s = upper_hull_subdivision(lifted)
    assert sum(normalized_volume(c) for c in s.cells) == normalized_volume(s.base)
    t = triangulate(s)
    assert sum(normalized_volume(c) for c in t.cells) == normalized_volume(s.base)
    for c in t.cells:
        assert len(c.vertices) == c.dim + 1


@given(lifted_configs(), lifted_configs())
def test_refinement_volume_additivity(a, b):
    sa = upper_hull_subdivision(a)
    sb = upper_hull_subdivision(b)
    if sa.base != sb.base:
        return
    r = common_refinement([sa, sb])
    assert sum(normalized_volume(c) for c in r.cells) == normalized_volume(sa.base)
    for c in r.cells:
        assert any(c.is_face_of(x) or all(x.contains(v) for v in c.vertices) for x in sa.cells)


def test_polytope_json_roundtrip():
    p = hull([(0, 0), (F(1, 2), 0), (0, 3)])
    assert Polytope.from_json(p.to_json()) == p
