import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricroof.adelic import ARCH, Canonical, DivisorSpec, RoofMetric, SmoothMetric
from toricroof.builders import SubtorusData, lp_metric, standard_simplex, subtorus_fs
from toricroof.concave import RoofFn
from toricroof.exactnum import value_float
from toricroof.geometry import hull, lattice_points
from toricroof.minima import essential_minimum
from toricroof.smoothsolve import (
    NoCertificate,
    check_concavity,
    fs_grad,
    fs_hess,
    fs_psi,
    problem_from_spec,
    secant_spec,
    smooth_roof_value,
    solve,
)


def smooth_curve():
    return subtorus_fs(SubtorusData([(1,), (2,)], [1, F(1, 4), F(1, 2)])).spec


def smooth_surface():
    return subtorus_fs(SubtorusData([(1, 0), (0, 1), (1, 1)], [1, 2, 4, 1])).spec


# -- the smooth potential ---------------------------------------------------------


def test_p1_fs_at_origin():
    assert fs_psi([[0], [1]], [1, 1], [0.0]) == pytest.approx(-0.5 * math.log(2), abs=1e-15)
    assert fs_grad([[0], [1]], [1, 1], [0.0])[0] == pytest.approx(0.5, abs=1e-15)


def test_asymptotic_slope_is_a_vertex():
    pts = [[0, 0], [2, 0], [0, 1], [1, 1]]
    g = fs_grad(pts, [1, 3, 2, 1], [40.0, 40.0])
    assert np.allclose(g, [0, 0], atol=1e-12)
    g = fs_grad(pts, [1, 3, 2, 1], [-40.0, 1.0])
    assert np.allclose(g, [2, 0], atol=1e-12)


def test_stable_for_large_arguments():
    assert math.isfinite(fs_psi([[0], [5]], [1, 1], [-500.0]))
    assert fs_psi([[0], [5]], [1, 1], [-500.0]) == pytest.approx(-2500.0 + 0.0, rel=1e-12)


vec = st.lists(st.floats(-3, 3), min_size=2, max_size=2)


@given(
    u=vec,
    w=st.lists(st.floats(0.1, 5), min_size=4, max_size=4),
    lam=st.sampled_from([1.0, 1.5, 2.0, 3.0]),
)
def test_gradient_matches_central_differences(u, w, lam):
    pts = [[0, 0], [1, 0], [0, 1], [2, 1]]
    u = np.array(u)
    h = 1e-6
    fd = [(fs_psi(pts, w, u + h * e, lam) - fs_psi(pts, w, u - h * e, lam)) / (2 * h) for e in np.eye(2)]
    assert np.allclose(fs_grad(pts, w, u, lam), fd, atol=1e-8)


@given(u=vec)
def test_hessian_matches_differences_of_gradient(u):
    pts, w = [[0, 0], [1, 0], [0, 1], [2, 1]], [1, 2, 3, 4]
    u = np.array(u)
    h = 1e-6
    fd = np.array([(fs_grad(pts, w, u + h * e) - fs_grad(pts, w, u - h * e)) / (2 * h) for e in np.eye(2)])
    H = fs_hess(pts, w, u)
    assert np.allclose(H, fd.T, atol=1e-6)
    assert np.all(np.linalg.eigvalsh(H) <= 1e-12)


# -- solving --------------------------------------------------------------------------


def test_smooth_curve_solution():
    res = solve(smooth_curve())
    assert abs(res.u0[0] - 0.5 * math.log(2)) < 1e-8
    assert abs(res.mu_ess - 0.5 * math.log(17)) < 1e-8
    assert res.optimality_residual <= 1e-10


def test_smooth_surface_solution():
    res = solve(smooth_surface())
    assert np.allclose(res.u0, [0.5 * math.log(2), -0.5 * math.log(2)], atol=1e-8)
    assert abs(res.mu_ess - math.log(3 * math.sqrt(2))) < 1e-8


@pytest.mark.parametrize("r", [1, 2, 3])
def test_fs_projective_space_symmetric(r):
    delta = standard_simplex(r)
    spec = lp_metric(delta, 2, {m: 1 for m in lattice_points(delta)}).spec
    res = solve(spec)
    assert abs(res.mu_ess - 0.5 * math.log(r + 1)) < 1e-9
    assert np.allclose(res.u0, 0, atol=1e-8)


@pytest.mark.parametrize("build", [smooth_curve, smooth_surface])
def test_objective_is_concave(build):
    assert check_concavity(problem_from_spec(build()), segments=100) <= 0


def test_solve_requires_smooth_place():
    spec = DivisorSpec(1, hull([(0,), (1,)])).add(ARCH, Canonical())
    with pytest.raises(ValueError, match="smooth"):
        solve(spec)


def test_iteration_cap_reports_no_certificate():
    with pytest.raises(NoCertificate) as info:
        solve(smooth_surface(), tol=0.0, max_iter=10)
    assert info.value.best is None or info.value.best.optimality_residual > 0


def test_result_json_is_numeric():
    js = solve(smooth_curve()).to_json()
    assert js["provenance"] == "numeric"
    assert set(js) >= {"u0_approx", "mu_ess_approx", "residual_approx", "iterations"}


# -- lattice reparametrization -------------------------------------------------------


def apply(a, m):
    return tuple(sum(a[i][j] * m[j] for j in range(len(m))) for i in range(len(a)))


def transform(spec, a):
    poly = hull([apply(a, v) for v in spec.polytope.vertices])
    out = DivisorSpec(spec.rank, poly)
    for e in spec.entries:
        m = e.metric
        if isinstance(m, SmoothMetric):
            m = SmoothMetric(tuple(apply(a, p) for p in m.points), m.weights, m.lam)
        elif isinstance(m, RoofMetric):
            m = RoofMetric(RoofFn([(apply(a, p), v) for p, v in m.roof.generators], poly))
        out.add(e.place, m, e.weight)
    return out


unimodular = st.lists(st.integers(-2, 2), min_size=2, max_size=2).map(
    lambda xy: [[1, xy[0]], [0, 1]] if xy[1] % 2 else [[1, 0], [xy[0], 1]]
).flatmap(
    lambda a: st.sampled_from([a, [[a[1][0], a[1][1]], [a[0][0], a[0][1]]], [[-x for x in a[0]], a[1]]])
)


@settings(max_examples=15)
@given(unimodular, unimodular)
def test_reparametrization_invariance(a, b):
    c = [[sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    ref = solve(smooth_surface()).mu_ess
    assert abs(solve(transform(smooth_surface(), c)).mu_ess - ref) <= 1e-9


# -- secant bridge to the exact path ----------------------------------------------------


def test_smooth_roof_endpoints_and_interior():
    m = SmoothMetric(((0,), (1,)), (1, 1))
    assert smooth_roof_value(m, 0.0) == 0.0
    # Legendre dual of -(1/2)log(1+e^{-2u}) is -(1/2)(x log x + (1-x) log(1-x))
    x = 0.3
    want = -0.5 * (x * math.log(x) + (1 - x) * math.log(1 - x))
    assert smooth_roof_value(m, x) == pytest.approx(want, abs=1e-12)


def test_secant_bridge_fine_grid():
    spec = smooth_curve()
    target = solve(spec).mu_ess
    approx = [value_float(essential_minimum(secant_spec(spec, F(1, k)))) for k in (10, 30, 100)]
    assert abs(approx[-1] - target) < 1e-4
    assert all(a <= b + 1e-15 for a, b in zip(approx, approx[1:]))
    assert all(a <= target + 1e-12 for a in approx)


def test_secant_rank_two_rejected():
    with pytest.raises(ValueError, match="rank 1"):
        secant_spec(smooth_surface(), F(1, 10))
