"""Adelic divisor data: places of Q, local metrics and the global roof function."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .concave import CellwisePA, RoofFn, dual_cellwise_to_roof, roof_weighted_sum
from .exactnum import _checked_prime, as_fraction
from .geometry import Polytope, hull, qpoint

__all__ = [
    "ARCH",
    "Canonical",
    "DivisorSpec",
    "Place",
    "PlaceEntry",
    "PsiMetric",
    "RoofMetric",
    "SmoothMetric",
    "ValidationReport",
    "global_roof",
    "local_roof",
    "psi_S",
    "validate",
]


@dataclass(frozen=True, order=True)
class Place:
    """An absolute value of Q: ``prime=None`` is the Archimedean place."""

    prime: int | None = None

    def __post_init__(self):
        if self.prime is not None:
            _checked_prime(int(self.prime))

    @property
    def is_archimedean(self) -> bool:
        return self.prime is None

    def label(self) -> str:
        return "inf" if self.prime is None else f"p:{self.prime}"

    @classmethod
    def parse(cls, text: str) -> "Place":
        if text == "inf":
            return cls(None)
        if text.startswith("p:"):
            return cls(int(text[2:]))
        raise ValueError(f"unknown place {text!r}")

    def log_abs(self, q):
        """log|q|_v as an exact LogValue (normalized absolute values of Q)."""
        from .exactnum import LogValue

        q = as_fraction(q)
        if q == 0:
            raise ValueError("zero coordinate has no absolute value")
        if self.prime is None:
            return LogValue.log(abs(q))
        p = self.prime
        e = 0
        num, den = q.numerator, q.denominator
        while num % p == 0:
            num //= p
            e += 1
        while den % p == 0:
            den //= p
            e -= 1
        return LogValue.log(p, -e)


ARCH = Place(None)


class Canonical:
    def __repr__(self):
        return "Canonical()"

    def __eq__(self, other):
        return isinstance(other, Canonical)

    def __hash__(self):
        return hash("canonical")


@dataclass(frozen=True)
class RoofMetric:
    roof: RoofFn


@dataclass(frozen=True)
class PsiMetric:
    psi: CellwisePA


@dataclass(frozen=True)
class SmoothMetric:
    """psi(u) = -(1/lam) log sum_j w_j exp(-lam <m_j, u>); lam = 2 is the Fubini-Study pullback."""

    points: tuple
    weights: tuple
    lam: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(qpoint(p) for p in self.points))
        object.__setattr__(self, "weights", tuple(as_fraction(w) for w in self.weights))
        object.__setattr__(self, "lam", as_fraction(self.lam))
        if len(self.points) != len(self.weights) or not self.points:
            raise ValueError("smooth metric needs one weight per point")
        if any(w < 0 for w in self.weights):
            raise ValueError("smooth metric weights must be nonnegative")
        if self.lam <= 0:
            raise ValueError("smooth metric exponent must be positive")

    @property
    def is_fs(self) -> bool:
        return self.lam == 2

    def support(self):
        return [p for p, w in zip(self.points, self.weights) if w > 0]


@dataclass(frozen=True)
class PlaceEntry:
    place: Place
    weight: Fraction
    metric: object


@dataclass
class DivisorSpec:
    """Toric metrized divisor: polytope plus finitely many non-canonical places."""

    rank: int
    polytope: Polytope
    entries: list = field(default_factory=list)
    semipositive: bool = True
    ample: bool = True
    note: str = ""
    meta: dict = field(default_factory=dict)

    def add(self, place: Place, metric, weight=1):
        self.entries.append(PlaceEntry(place, as_fraction(weight), metric))
        return self

    def metric_at(self, place: Place):
        for e in self.entries:
            if e.place == place:
                return e.metric
        return Canonical()

    @property
    def smooth_entries(self):
        return [e for e in self.entries if isinstance(e.metric, SmoothMetric)]

    @property
    def is_exact_path(self) -> bool:
        return not self.smooth_entries

    @property
    def is_numeric(self) -> bool:
        return any(isinstance(e.metric, RoofMetric) and e.metric.roof.is_numeric for e in self.entries)

    def non_canonical(self):
        return [e for e in self.entries if not isinstance(e.metric, Canonical)]


@dataclass
class ValidationReport:
    errors: list

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_if_invalid(self):
        if self.errors:
            raise ValueError("; ".join(self.errors))


def validate(spec: DivisorSpec) -> ValidationReport:
    errs = []
    delta = spec.polytope
    if delta.ambient_rank != spec.rank:
        errs.append(f"polytope rank {delta.ambient_rank} differs from divisor rank {spec.rank}")
    seen = set()
    for e in spec.entries:
        tag = e.place.label()
        if e.place in seen:
            errs.append(f"{tag}: place listed twice")
        seen.add(e.place)
        if e.weight <= 0:
            errs.append(f"{tag}: weight must be positive")
        m = e.metric
        if isinstance(m, RoofMetric):
            if m.roof.domain != delta:
                errs.append(f"{tag}: domain mismatch")
        elif isinstance(m, PsiMetric):
            try:
                stab = m.psi.check_recession()
            except ValueError as exc:
                errs.append(f"{tag}: {exc}")
                continue
            if stab != delta:
                errs.append(f"{tag}: domain mismatch")
            if spec.semipositive and not m.psi.is_concave():
                errs.append(f"{tag}: semipositive flag set but psi is not concave")
        elif isinstance(m, SmoothMetric):
            if not e.place.is_archimedean:
                errs.append(f"{tag}: smooth data only at the Archimedean place")
            if any(len(p) != spec.rank for p in m.points):
                errs.append(f"{tag}: smooth points of the wrong rank")
            elif hull(m.support(), ambient_rank=spec.rank) != delta:
                errs.append(f"{tag}: domain mismatch")
        elif not isinstance(m, Canonical):
            errs.append(f"{tag}: unknown metric type {type(m).__name__}")
    if len(spec.smooth_entries) > 1:
        errs.append("at most one smooth place is supported")
    return ValidationReport(errs)


def local_roof(spec: DivisorSpec, entry: PlaceEntry) -> RoofFn:
    m = entry.metric
    if isinstance(m, Canonical):
        return RoofFn.zero(spec.polytope)
    if isinstance(m, RoofMetric):
        return m.roof
    if isinstance(m, PsiMetric):
        return dual_cellwise_to_roof(m.psi)
    raise ValueError(f"{entry.place.label()}: smooth metric has no exact roof function; use smoothsolve")


def _weighted_roof(spec, entries) -> RoofFn:
    terms = [(e.weight, local_roof(spec, e)) for e in entries if not isinstance(e.metric, Canonical)]
    if not terms:
        return RoofFn.zero(spec.polytope)
    if len(terms) == 1 and terms[0][0] == 1:
        return terms[0][1]
    return roof_weighted_sum(terms)


def global_roof(spec: DivisorSpec) -> RoofFn:
    """sum_v n_v theta_v over the non-canonical places."""
    if spec.smooth_entries:
        raise ValueError("smooth metric present: use smoothsolve")
    return _weighted_roof(spec, spec.entries)


def psi_S(spec: DivisorSpec) -> RoofFn:
    """theta_S = sum over finite places; psi_eval/subdifferential_psi on it give psi_S."""
    return _weighted_roof(spec, [e for e in spec.entries if not e.place.is_archimedean])
