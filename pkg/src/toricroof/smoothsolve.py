"""Essential minimum with one smooth Archimedean metric.

We maximize the concave function g(u) = psi_S(u) + psi_inf(-u), where psi_S
is the (piecewise-affine) dual of the finite-place roof and psi_inf is the
smooth log-sum-exp potential. The maximizer is certified by the optimality
condition grad psi_inf(-u0) in the sup-differential of psi_S at u0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from fractions import Fraction

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq
from scipy.special import logsumexp

from .adelic import Canonical, DivisorSpec, RoofMetric, SmoothMetric, local_roof, psi_S, validate
from .concave import RoofFn
from .exactnum import value_float

__all__ = [
    "NoCertificate",
    "SmoothProblem",
    "SmoothSolveResult",
    "check_concavity",
    "fs_grad",
    "fs_hess",
    "fs_psi",
    "problem_from_spec",
    "secant_spec",
    "smooth_roof_value",
    "solve",
    "solve_problem",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


class NoCertificate(RuntimeError):
    """Raised when no iterate satisfies the optimality certificate."""

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


def _softmax_terms(points, weights, v, lam):
    a = np.log(weights) - lam * (points @ v)
    return a, np.exp(a - logsumexp(a))


def fs_psi(points, weights, u, lam=2.0) -> float:
    """-(1/lam) log sum_j w_j exp(-lam <m_j, u>), stabilized."""
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    a = np.log(weights) - lam * (points @ np.asarray(u, dtype=float))
    return float(-logsumexp(a) / lam)


def fs_grad(points, weights, u, lam=2.0) -> np.ndarray:
    """Gradient of :func:`fs_psi`: the softmax-weighted mean of the m_j."""
    points = np.asarray(points, dtype=float)
    _, s = _softmax_terms(points, np.asarray(weights, dtype=float), np.asarray(u, dtype=float), lam)
    return s @ points


def fs_hess(points, weights, u, lam=2.0) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    _, s = _softmax_terms(points, np.asarray(weights, dtype=float), np.asarray(u, dtype=float), lam)
    mean = s @ points
    centered = points - mean
    return -lam * (centered.T * s) @ centered


@dataclass
class SmoothProblem:
    """Float data of g(u) = min_k(<x_k,u> - t_k) + psi_inf(-u)."""

    gen_points: np.ndarray
    gen_values: np.ndarray
    smooth_points: np.ndarray
    smooth_weights: np.ndarray
    lam: float
    gen_faces: list = field(default_factory=list)  # candidate active sets from the subdivision

    @property
    def dim(self) -> int:
        return self.gen_points.shape[1]

    def psi_s_terms(self, u):
        return self.gen_points @ u - self.gen_values

    def psi_s(self, u) -> float:
        return float(self.psi_s_terms(u).min())

    def psi_inf(self, v) -> float:
        return fs_psi(self.smooth_points, self.smooth_weights, v, self.lam)

    def g(self, u) -> float:
        return self.psi_s(u) + self.psi_inf(-u)

    def grad_inf(self, v):
        return fs_grad(self.smooth_points, self.smooth_weights, v, self.lam)

    def hess_inf(self, v):
        return fs_hess(self.smooth_points, self.smooth_weights, v, self.lam)


@dataclass
class SmoothSolveResult:
    u0: np.ndarray
    mu_ess: float
    optimality_residual: float
    cell_id: tuple
    iterations: int
    x_opt: np.ndarray | None = None
    subdifferential_dim: int = 0

    def to_json(self):
        return {
            "u0_approx": [float(c) for c in self.u0],
            "mu_ess_approx": self.mu_ess,
            "residual_approx": self.optimality_residual,
            "cell": list(self.cell_id),
            "iterations": self.iterations,
            "x_opt_approx": None if self.x_opt is None else [float(c) for c in self.x_opt],
            "subdifferential_dim": self.subdifferential_dim,
            "provenance": "numeric",
        }


# ---------------------------------------------------------------------------
# problem assembly


def _smooth_entry(spec: DivisorSpec):
    sm = spec.smooth_entries
    if len(sm) != 1:
        raise ValueError("solve needs exactly one smooth Archimedean metric")
    entry = sm[0]
    if entry.weight != 1:
        raise ValueError("the smooth place must carry weight 1")
    return entry.metric


def problem_from_spec(spec: DivisorSpec, face=None) -> SmoothProblem:
    validate(spec).raise_if_invalid()
    metric: SmoothMetric = _smooth_entry(spec)
    theta = psi_S(spec)
    delta = spec.polytope
    if face is None:
        face = delta
        if delta.dim < delta.ambient_rank:
            raise ValueError("solve needs a full-dimensional polytope")
    chart = face.chart
    gens = [(p, v) for p, v in theta.envelope_generators if face.contains(p)]
    sm = [(p, w) for p, w in zip(metric.points, metric.weights) if w > 0 and face.contains(p)]
    gp = np.array([[float(c) for c in chart.project(p)] for p, _ in gens], dtype=float).reshape(len(gens), chart.dim)
    gv = np.array([value_float(v) for _, v in gens], dtype=float)
    sp = np.array([[float(c) for c in chart.project(p)] for p, _ in sm], dtype=float).reshape(len(sm), chart.dim)
    sw = np.array([float(w) for _, w in sm], dtype=float)
    index = {p: i for i, (p, _) in enumerate(gens)}
    faces = set()
    for cell in theta.cells:
        for d in range(cell.dim + 1):
            for fs in cell.face_vertex_sets(d):
                verts = [cell.vertices[i] for i in fs]
                if all(v in index for v in verts):
                    faces.add(tuple(sorted(index[v] for v in verts)))
    return SmoothProblem(gp, gv, sp, sw, float(metric.lam), sorted(faces, key=lambda k: (len(k), k)))


# ---------------------------------------------------------------------------
# optimization


def _distance_to_hull(pts, target):
    """Euclidean distance from target to conv(pts), by projection onto faces spanned by subsets."""
    best = min(float(np.linalg.norm(p - target)) for p in pts)
    k = len(pts)
    dim = pts.shape[1]
    for size in range(2, min(k, dim + 1) + 1):
        for sub in itertools.combinations(range(k), size):
            base = pts[sub[0]]
            B = (pts[list(sub[1:])] - base).T
            coef, *_ = np.linalg.lstsq(B, target - base, rcond=None)
            if np.linalg.matrix_rank(B, tol=1e-12) < size - 1:
                continue
            if coef.min() < -1e-14 or coef.sum() > 1 + 1e-14:
                continue
            best = min(best, float(np.linalg.norm(base + B @ coef - target)))
    return best


def _residual(prob: SmoothProblem, u, active):
    """Distance from grad psi_inf(-u) to conv{x_k : k in active}."""
    return _distance_to_hull(prob.gen_points[list(active)], prob.grad_inf(-u))


def _active(prob: SmoothProblem, u, tol):
    terms = prob.psi_s_terms(u)
    m = terms.min()
    scale = 1.0 + np.abs(terms).max()
    return tuple(int(k) for k in np.nonzero(terms - m <= tol * scale)[0])


def _subgradient_phase(prob: SmoothProblem, iters: int):
    n = prob.dim
    u = np.zeros(n)
    best_u, best_g = u.copy(), prob.g(u)
    spread = float(np.ptp(prob.gen_values)) if len(prob.gen_values) else 0.0
    step0 = max(1.0, spread)
    for i in range(iters):
        terms = prob.psi_s_terms(u)
        k = int(terms.argmin())
        sg = prob.gen_points[k] - prob.grad_inf(-u)
        nrm = np.linalg.norm(sg)
        if nrm < 1e-14:
            break
        u = u + step0 / np.sqrt(i + 1.0) * sg / nrm
        val = prob.g(u)
        if val > best_g:
            best_u, best_g = u.copy(), val
    return best_u, i + 1


def _newton_on_face(prob: SmoothProblem, active, u_start, max_iter=200):
    """Maximize g on the affine set where the active generators tie."""
    x = prob.gen_points[list(active)]
    t = prob.gen_values[list(active)]
    k0 = 0
    D = x[1:] - x[k0]
    rhs = t[1:] - t[k0]
    n = prob.dim
    if len(active) > 1:
        up, *_ = np.linalg.lstsq(D, rhs, rcond=None)
        if np.linalg.norm(D @ up - rhs) > 1e-9 * (1 + np.abs(rhs).max()):
            return None, 0
        N = null_space(D)
    else:
        up = np.zeros(n)
        N = np.eye(n)
    z = N.T @ (u_start - up) if N.size else np.zeros(0)

    def h(zz):
        uu = up + N @ zz if N.size else up
        return float(x[k0] @ uu - t[k0]) + prob.psi_inf(-uu)

    it = 0
    if N.size:
        for it in range(1, max_iter + 1):
            u = up + N @ z
            grad = N.T @ (x[k0] - prob.grad_inf(-u))
            if np.linalg.norm(grad) < 1e-15:
                break
            H = N.T @ prob.hess_inf(-u) @ N
            try:
                step = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = grad
            if grad @ step <= 0:
                step = grad
            a, h0 = 1.0, h(z)
            while a > 1e-12 and h(z + a * step) < h0 - 1e-15 * (1 + abs(h0)):
                a *= 0.5
            z = z + a * step
            if np.linalg.norm(a * step) < 1e-15 * (1 + np.linalg.norm(z)):
                break
    u = up + N @ z if N.size else up
    return u, it


def _certify(prob: SmoothProblem, u, tol, active_tol=1e-9):
    active = _active(prob, u, active_tol)
    return _residual(prob, u, active), active


def _rank(points):
    if len(points) <= 1:
        return 0
    return int(np.linalg.matrix_rank(points[1:] - points[0], tol=1e-9))


def _result(prob, u, res, active, iters):
    return SmoothSolveResult(
        u0=u,
        mu_ess=-prob.g(u),
        optimality_residual=res,
        cell_id=active,
        iterations=iters,
        x_opt=prob.grad_inf(-u),
        subdifferential_dim=_rank(prob.gen_points[list(active)]),
    )


def solve_problem(prob: SmoothProblem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> SmoothSolveResult:
    n = prob.dim
    if n == 0:
        # a point: the roof value is the sum of the two local values
        g = -float(prob.gen_values.max()) + prob.psi_inf(np.zeros(0))
        return SmoothSolveResult(np.zeros(0), -g, 0.0, (int(prob.gen_values.argmax()),), 0)
    sub_iters = min(max_iter, 2000)
    u_sub, total = _subgradient_phase(prob, sub_iters)
    best = None
    tried = set()
    candidates = []
    for delta in (1e-2, 1e-4, 1e-6, 1e-8):
        candidates.append(_active(prob, u_sub, delta))
    candidates += list(prob.gen_faces)
    for active in candidates:
        if active in tried:
            continue
        tried.add(active)
        u, it = _newton_on_face(prob, active, u_sub)
        total += it
        if u is None:
            continue
        res, act = _certify(prob, u, tol)
        if not set(active) <= set(act):
            continue  # the face optimum left its cell
        if best is None or res < best[1]:
            best = (u, res, act)
        if res <= tol:
            return _result(prob, u, res, act, total)
        if total > max_iter:
            break
    raise NoCertificate(
        f"no certified maximizer (best residual {best[1] if best else float('nan'):.3g})",
        best=None if best is None else _result(prob, best[0], best[1], best[2], total),
    )


def solve(spec: DivisorSpec, face=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> SmoothSolveResult:
    """mu_ess = -psi_S(u0) - psi_inf(-u0) at a certified maximizer u0.

    With ``face`` given, the problem is restricted to that face of the
    polytope (in its affine chart), which yields the maximum of the roof on
    the face.
    """
    return solve_problem(problem_from_spec(spec, face), tol, max_iter)


def check_concavity(prob: SmoothProblem, segments: int = 100, seed: int = 0, radius: float = 5.0, slack=1e-12):
    """Midpoint test of concavity of g along random segments; returns the worst violation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(segments):
        a = rng.uniform(-radius, radius, prob.dim)
        b = rng.uniform(-radius, radius, prob.dim)
        ga, gb, gm = prob.g(a), prob.g(b), prob.g((a + b) / 2)
        viol = (ga + gb) / 2 - gm - slack * (1 + abs(ga) + abs(gb))
        worst = max(worst, viol)
    return worst


def smooth_roof_value(metric: SmoothMetric, x: float) -> float:
    """Legendre dual inf_u (x u - psi(u)) of a rank-1 smooth potential, by root finding on psi'(u) = x."""
    pts = np.array([float(p[0]) for p in metric.points])
    ws = np.array([float(w) for w in metric.weights])
    lam = float(metric.lam)
    keep = ws > 0
    pts, ws = pts[keep], ws[keep]
    lo, hi = pts.min(), pts.max()
    if x <= lo or x >= hi:
        end = lo if x <= lo else hi
        return float(np.log(ws[pts == end].sum()) / lam)
    P = pts.reshape(-1, 1)

    def slope_gap(u):
        return float(fs_grad(P, ws, [u], lam)[0]) - x

    a, b = -1.0, 1.0
    while slope_gap(b) > 0:
        b *= 2
    while slope_gap(a) < 0:
        a *= 2
    u = brentq(slope_gap, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(x * u - fs_psi(P, ws, [u], lam))


def secant_spec(spec: DivisorSpec, step: Fraction) -> DivisorSpec:
    """Exact-path stand-in for a rank-1 smooth spec: the smooth roof is replaced by its
    piecewise-affine interpolation on a grid of the given step, finite roofs by their float images.
    """
    if spec.rank != 1:
        raise ValueError("secant approximation is implemented for rank 1 only")
    _smooth_entry(spec)
    entry = spec.smooth_entries[0]
    a, b = min(v[0] for v in spec.polytope.vertices), max(v[0] for v in spec.polytope.vertices)
    xs, x = [], a
    while x < b:
        xs.append(x)
        x += step
    xs.append(b)
    gens = [((x,), smooth_roof_value(entry.metric, float(x))) for x in xs]
    out = DivisorSpec(1, spec.polytope, note="secant approximation")
    out.add(entry.place, RoofMetric(RoofFn(gens, spec.polytope)), entry.weight)
    for e in spec.entries:
        if e is not entry and not isinstance(e.metric, Canonical):
            out.add(e.place, RoofMetric(local_roof(spec, e).to_float()), e.weight)
    return out
