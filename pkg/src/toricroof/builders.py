"""Constructors for the standard example families, with closed-form cross-checks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .adelic import ARCH, DivisorSpec, Place, RoofMetric, SmoothMetric
from .concave import RoofFn, integrate, vmin
from .exactnum import LogValue, as_fraction, lv_from_log_rational
from .geometry import Polytope, det, hull, inverse, lattice_points, qpoint

__all__ = [
    "BundleData",
    "Built",
    "SubtorusData",
    "bundle_face_sum",
    "canonical",
    "hirzebruch",
    "lp_metric",
    "lp_minima",
    "prescribe",
    "standard_simplex",
    "subtorus_canonical",
    "subtorus_fs",
    "toric_bundle",
    "translated_canonical",
    "wps_height_by_integration",
    "wps_metric",
]


@dataclass
class Built:
    """A divisor spec plus whatever closed forms the family provides."""

    spec: DivisorSpec
    mu: list | None = None
    extra: dict = field(default_factory=dict)


def standard_simplex(r: int) -> Polytope:
    pts = [tuple([0] * r)]
    for j in range(r):
        e = [0] * r
        e[j] = 1
        pts.append(tuple(e))
    return hull(pts, ambient_rank=r)


def canonical(delta: Polytope) -> Built:
    spec = DivisorSpec(delta.ambient_rank, delta, [], note="canonical")
    return Built(spec, mu=[Fraction(0)] * (delta.dim + 1))


# ---------------------------------------------------------------------------
# weighted L^p metrics


def lp_minima(delta: Polytope, lam, alpha: dict):
    """mu^i = min over (n-i+1)-faces F of (1/lam) log sum_{m in F cap M} alpha_m."""
    lam = as_fraction(lam)
    n = delta.dim
    out = []
    for i in range(1, n + 2):
        vals = []
        for f in delta.faces(n - i + 1):
            s = sum((alpha.get(m, Fraction(0)) for m in lattice_points(f)), Fraction(0))
            vals.append(lv_from_log_rational(s, 1 / lam))
        out.append(vmin(vals))
    return out


def lp_metric(delta: Polytope, lam, alpha: dict) -> Built:
    alpha = {qpoint(m): as_fraction(a) for m, a in alpha.items()}
    for m, a in alpha.items():
        if a < 0:
            raise ValueError("weights must be nonnegative")
        if any(c.denominator != 1 for c in m) or not delta.contains(m):
            raise ValueError(f"weight at {m} is not on a lattice point of the polytope")
    for v in delta.vertices:
        if alpha.get(v, 0) <= 0:
            raise ValueError(f"vertex {tuple(str(c) for c in v)} has zero weight")
    pts = sorted(m for m, a in alpha.items() if a > 0)
    spec = DivisorSpec(delta.ambient_rank, delta, note="weighted Lp metric")
    spec.add(ARCH, SmoothMetric(tuple(pts), tuple(alpha[m] for m in pts), as_fraction(lam)))
    return Built(spec, mu=lp_minima(delta, lam, alpha))


# ---------------------------------------------------------------------------
# weighted projective spaces


def _wps_data(delta: Polytope, c, ell=None):
    n = delta.ambient_rank
    if delta.dim != n or len(delta.vertices) != n + 1:
        raise ValueError("weighted projective metric needs a full-dimensional simplex")
    c = [as_fraction(x) for x in c]
    if len(c) != n + 1 or any(x <= 0 for x in c):
        raise ValueError("need n+1 positive coefficients c_i")
    verts = list(delta.vertices)
    if ell is None:
        ell = []
        for i in range(n + 1):
            others = [v for j, v in enumerate(verts) if j != i]
            facet = next((nrm, off) for nrm, off in delta.facets if all(sum(a * b for a, b in zip(nrm, v)) == off for v in others))
            ell.append(facet)
    ell = [(qpoint(u), as_fraction(lmb)) for u, lmb in ell]
    # order vertices so that ell_i(m_i) > 0
    ms = []
    for u, lmb in ell:
        pos = [v for v in verts if sum(a * b for a, b in zip(u, v)) - lmb > 0]
        if len(pos) != 1:
            raise ValueError("affine functions do not cut out the simplex")
        ms.append(pos[0])
    for v in verts:
        if any(sum(a * b for a, b in zip(u, v)) - lmb < 0 for u, lmb in ell):
            raise ValueError("affine functions do not cut out the simplex")
    total = [sum(ci * u[k] for ci, (u, _) in zip(c, ell)) for k in range(n)]
    if any(total):
        raise ValueError("sum of c_i u_i must vanish")
    s = sum(ci * lmb for ci, (_, lmb) in zip(c, ell))
    if s >= 0:
        raise ValueError("Lambda = -1/sum(c_i lambda_i) must be positive")
    lam = -1 / s
    return n, c, ell, ms, lam


def wps_metric(delta: Polytope, c, ell=None) -> Built:
    n, c, ell, ms, lam = _wps_data(delta, c, ell)
    built = lp_metric(delta, lam, {m: lam * ci for m, ci in zip(ms, c)})
    mu_subsets = []
    for i in range(1, n + 2):
        vals = [
            lv_from_log_rational(sum(lam * c[j] for j in I), 1 / lam)
            for I in itertools.combinations(range(n + 1), n - i + 2)
        ]
        mu_subsets.append(vmin(vals))
    harmonic = sum((Fraction(1, j) for j in range(2, n + 2)), Fraction(0))
    hdeg = (n + 1) / lam * harmonic + sum((lv_from_log_rational(lam * ci, 1 / lam) for ci in c), LogValue())
    built.spec.note = "weighted projective metric"
    built.extra.update(
        {"Lambda": lam, "mu_subsets": mu_subsets, "height_over_degree": hdeg, "vertices": ms, "c": c, "ell": ell}
    )
    return built


def _sympy_to_logvalue(expr) -> LogValue:
    expr = sympy.nsimplify(sympy.expand(sympy.expand_log(sympy.simplify(expr), force=True)))
    expr = sympy.expand(sympy.expand_log(expr, force=True))
    out = LogValue()
    for term in sympy.Add.make_args(expr):
        coeff, rest = term.as_coeff_Mul()
        if rest == 1:
            out = out + Fraction(int(coeff.p), int(coeff.q))
            continue
        if not isinstance(rest, sympy.log) or not rest.args[0].is_Rational:
            raise ValueError(f"unexpected term {term} in exact integral")
        arg = rest.args[0]
        out = out + lv_from_log_rational(Fraction(int(arg.p), int(arg.q)), Fraction(int(coeff.p), int(coeff.q)))
    return out


def wps_height_by_integration(built: Built):
    """(n+1)! times the exact integral of -sum c_i l_i log l_i over the simplex.

    The integrand is pulled back to barycentric coordinates of the standard
    simplex, where l_i = beta_i / (Lambda c_i), and integrated symbolically.
    """
    ex = built.extra
    lam, c, ms = ex["Lambda"], ex["c"], ex["vertices"]
    n = len(c) - 1
    if n < 1:
        raise ValueError("integration check needs n >= 1")
    L = sympy.Rational(lam.numerator, lam.denominator)
    s = sympy.Symbol("s", positive=True)
    w = sympy.symbols(f"w1:{n}", positive=True) if n > 1 else ()
    total = 0
    for ci in c:
        C = sympy.Rational(ci.numerator, ci.denominator)
        # term -c_i l_i log l_i with l_i = beta_i/(L c_i); beta_i = s is one barycentric coordinate
        # and w are n-1 of the remaining ones (unit-Jacobian change of variables)
        term = -(s / L) * (sympy.log(s) - sympy.log(L * C))
        res = term
        for k in range(len(w)):
            upper = 1 - s - sum(w[k + 1 :])
            res = sympy.integrate(sympy.expand(res), (w[k], 0, upper))
        total += sympy.integrate(sympy.expand(res), (s, 0, 1))
    res = total
    jac = abs(det([[x - y for x, y in zip(m, ms[0])] for m in ms[1:]])) if n else Fraction(1)
    integral = _sympy_to_logvalue(res) * jac
    return math.factorial(n + 1) * integral


# ---------------------------------------------------------------------------
# toric bundles


@dataclass(frozen=True)
class BundleData:
    n: int
    a: tuple

    def __post_init__(self):
        a = tuple(int(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if self.n < 0 or not a:
            raise ValueError("need n >= 0 and at least one twist a_j")
        if any(x < 1 for x in a) or list(a) != sorted(a):
            raise ValueError("twists must satisfy 1 <= a_0 <= ... <= a_r")

    @property
    def r(self) -> int:
        return len(self.a) - 1


def _bundle_weights(data: BundleData) -> dict:
    n, r = data.n, data.r
    alpha = {}
    for j, aj in enumerate(data.a):
        y = [0] * r
        if j >= 1:
            y[j - 1] = 1
        for ks in itertools.product(range(aj + 1), repeat=n):
            k0 = aj - sum(ks)
            if k0 < 0:
                continue
            coef = math.factorial(aj) // math.factorial(k0)
            for k in ks:
                coef //= math.factorial(k)
            m = qpoint(list(ks) + y)
            alpha[m] = alpha.get(m, Fraction(0)) + coef
    return alpha


def bundle_polytope(data: BundleData) -> Polytope:
    n, r = data.n, data.r
    pts = []
    for j, aj in enumerate(data.a):
        y = [0] * r
        if j >= 1:
            y[j - 1] = 1
        pts.append(tuple([0] * n + y))
        for i in range(n):
            x = [0] * n
            x[i] = aj
            pts.append(tuple(x + y))
    return hull(pts, ambient_rank=n + r)


def bundle_face_sum(data: BundleData, I, J) -> int:
    """sum of alpha over F_{I,J}, read off by evaluating at the point p_{I,J}."""
    return sum((data.n + 1 - len(I)) ** aj for j, aj in enumerate(data.a) if j not in J)


def toric_bundle(data: BundleData) -> Built:
    n, r = data.n, data.r
    delta = bundle_polytope(data)
    built = lp_metric(delta, 2, _bundle_weights(data))
    ess = lv_from_log_rational(sum((n + 1) ** aj for aj in data.a), Fraction(1, 2))
    mu_ell = []
    for i in range(1, n + r + 2):
        vals = []
        for ell in range(max(0, i - r - 1), min(i - 1, n) + 1):
            s = sum((n + 1 - ell) ** data.a[j] for j in range(0, r + 1 - i + ell + 1))
            vals.append(lv_from_log_rational(s, Fraction(1, 2)))
        mu_ell.append(vmin(vals))
    # p_{I,J} route: all I, J with #I + #J = i - 1, proper subsets
    mu_pij = []
    for i in range(1, n + r + 2):
        vals = []
        for h in range(0, i):
            for I in itertools.combinations(range(n + 1), h):
                if len(I) == n + 1:
                    continue
                for J in itertools.combinations(range(r + 1), i - 1 - h):
                    if len(J) == r + 1:
                        continue
                    vals.append(lv_from_log_rational(bundle_face_sum(data, I, J), Fraction(1, 2)))
        mu_pij.append(vmin(vals))
    built.spec.note = f"toric bundle n={n} a={list(data.a)}"
    built.extra.update({"ess": ess, "mu_ell": mu_ell, "mu_pij": mu_pij})
    return built


def hirzebruch(a0: int, b: int) -> Built:
    built = toric_bundle(BundleData(1, (a0, a0 + b)))
    built.extra["triple"] = [
        lv_from_log_rational(2**a0 + 2 ** (a0 + b), Fraction(1, 2)),
        lv_from_log_rational(2, Fraction(1, 2)),
        Fraction(0),
    ]
    return built


# ---------------------------------------------------------------------------
# translates of subtori


@dataclass(frozen=True)
class SubtorusData:
    """Monomial map t -> (p_0 t^{m_0} : ... : p_r t^{m_r}) with m_0 = 0."""

    exponents: tuple
    coords: tuple

    def __post_init__(self):
        ms = tuple(tuple(int(c) for c in m) for m in self.exponents)
        ps = tuple(as_fraction(p) for p in self.coords)
        object.__setattr__(self, "exponents", ms)
        object.__setattr__(self, "coords", ps)
        if not ms:
            raise ValueError("need at least one exponent m_1")
        if len(ps) != len(ms) + 1:
            raise ValueError("need r+1 coordinates p_0..p_r for r exponents")
        if any(p == 0 for p in ps):
            raise ValueError("zero coordinate")
        if len({len(m) for m in ms}) != 1:
            raise ValueError("exponents of mixed rank")

    @property
    def points(self):
        n = len(self.exponents[0])
        return [tuple([0] * n)] + list(self.exponents)


def _lattice_basis(vectors):
    """Row basis of the lattice generated by integer vectors (Hermite normal form)."""
    from sympy.matrices.normalforms import hermite_normal_form

    mat = sympy.Matrix([list(v) for v in vectors]).T  # columns are generators
    h = hermite_normal_form(mat)
    cols = [tuple(int(x) for x in h.col(k)) for k in range(h.shape[1])]
    return [c for c in cols if any(c)]


def _reduce_to_lattice(points):
    """Coordinates of integer points in a basis of the lattice they generate."""
    n = len(points[0])
    basis = _lattice_basis([p for p in points if any(p)])
    k = len(basis)
    if k == n and abs(det(basis)) == 1:
        return [qpoint(p) for p in points], None
    # pick k independent coordinates to solve x * B = p
    from .geometry import rref

    _, piv = rref([list(b) for b in basis])
    rows = [[Fraction(b[p]) for b in basis] for p in piv[:k]]
    # rows: for each pivot coordinate p, (B_1[p], ..., B_k[p]); solve rows * x = p[piv]
    inv = inverse(rows)
    out = []
    for p in points:
        x = tuple(sum(inv[i][j] * p[piv[j]] for j in range(k)) for i in range(k))
        out.append(x)
    return out, basis


def _subtorus_points(data: SubtorusData):
    pts, basis = _reduce_to_lattice(data.points)
    return pts, basis


def subtorus_places(data: SubtorusData):
    primes = set()
    for p in data.coords:
        for q in (p.numerator, p.denominator):
            primes.update(sympy.factorint(abs(q)).keys())
    return [ARCH] + [Place(int(q)) for q in sorted(primes)]


def subtorus_canonical(data: SubtorusData) -> Built:
    pts, basis = _subtorus_points(data)
    delta = hull(pts)
    spec = DivisorSpec(len(pts[0]), delta, note="subtorus translate, canonical metric")
    lifts = {}
    for place in subtorus_places(data):
        hs = [place.log_abs(p) for p in data.coords]
        lifts[place.label()] = hs
        if all(h.is_zero() for h in hs):
            continue
        spec.add(place, RoofMetric(RoofFn(list(zip(pts, hs)), delta)))
    return Built(spec, extra={"lifts": lifts, "lattice_basis": basis})


def subtorus_fs(data: SubtorusData) -> Built:
    pts, basis = _subtorus_points(data)
    delta = hull(pts)
    spec = DivisorSpec(len(pts[0]), delta, note="subtorus translate, Fubini-Study metric")
    spec.add(ARCH, SmoothMetric(tuple(pts), tuple(p * p for p in data.coords), Fraction(2)))
    for place in subtorus_places(data)[1:]:
        hs = [place.log_abs(p) for p in data.coords]
        if all(h.is_zero() for h in hs):
            continue
        spec.add(place, RoofMetric(RoofFn(list(zip(pts, hs)), delta)))
    return Built(spec, extra={"lattice_basis": basis})


def translated_canonical(delta: Polytope, data) -> Built:
    """Local roofs x -> <x, u_v> + gamma_v (translated and shifted canonical metrics).

    ``data`` is a list of (place, weight, u_v, gamma_v).
    """
    spec = DivisorSpec(delta.ambient_rank, delta, note="translated canonical")
    for place, w, u, g in data:
        gens = []
        for v in delta.vertices:
            val = g
            for a, b in zip(v, u):
                if a:
                    val = val + a * b
            gens.append((v, val))
        spec.add(place, RoofMetric(RoofFn(gens, delta)), w)
    return Built(spec)


# ---------------------------------------------------------------------------
# prescribed minima and height


def _prescribe_roof(mu, t: Fraction, delta):
    r = len(mu) - 1
    gens = []
    for j in range(r + 1):
        e = [Fraction(0)] * r
        if j >= 1:
            e[j - 1] = t
        gens.append((tuple(e), mu[0]))
    for j in range(1, r + 1):
        e = [Fraction(0)] * r
        e[j - 1] = Fraction(1)
        gens.append((tuple(e), mu[j]))
    return RoofFn(gens, delta)


def prescribe(mu, nu, tol: float = 1e-10, max_iter: int = 200):
    """Roof on the standard simplex with successive minima ``mu`` and height ``nu``.

    Returns (Built, t). The roof is the smallest concave function equal to
    mu_1 on t*simplex and mu_{j+1} at e_j; t is found by bisection.
    """
    mu = [float(x) for x in mu]
    nu = float(nu)
    r = len(mu) - 1
    if r < 1:
        raise ValueError("need r >= 1 (at least two minima)")
    if any(a < b for a, b in zip(mu, mu[1:])):
        raise ValueError("minima must satisfy mu_1 >= ... >= mu_{r+1}")
    total = sum(mu)
    top = (r + 1) * mu[0]
    if nu < total - tol:
        raise ValueError(f"height {nu} below the sum of minima {total}: need sum(mu) <= nu")
    delta = standard_simplex(r)
    fact = math.factorial(r + 1)
    all_equal = all(abs(x - mu[0]) <= tol for x in mu)
    if all_equal and abs(nu - top) <= tol:
        roof = _prescribe_roof(mu, Fraction(0), delta)
        return _prescribed(roof, delta, mu, nu, Fraction(0))
    if nu >= top - tol:
        raise ValueError(
            f"height {nu} not below (r+1)*mu_1 = {top}: the boundary is attained only by a constant roof"
        )

    def height_at(t):
        return fact * float(integrate(_prescribe_roof(mu, t, delta)))

    lo, hi = Fraction(0), Fraction(1)
    if abs(height_at(lo) - nu) <= tol:
        return _prescribed(_prescribe_roof(mu, lo, delta), delta, mu, nu, lo)
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        h = height_at(mid)
        if abs(h - nu) <= tol:
            return _prescribed(_prescribe_roof(mu, mid, delta), delta, mu, nu, mid)
        if h < nu:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("bisection did not reach the height tolerance")


def _prescribed(roof, delta, mu, nu, t):
    spec = DivisorSpec(delta.ambient_rank, delta, note="prescribed minima and height (numeric roof)")
    spec.add(ARCH, RoofMetric(roof))
    return Built(spec, mu=list(mu), extra={"t": t, "nu": nu}), t
