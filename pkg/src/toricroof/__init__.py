"""Exact successive minima and heights of toric metrized divisors over Q."""
from .adelic import ARCH, Canonical, DivisorSpec, Place, PsiMetric, RoofMetric, SmoothMetric, validate
from .concave import CellwisePA, RoofFn, concavify, integrate, roof_eval
from .exactnum import LogValue, PrecisionExhausted, lv_sign
from .geometry import Polytope, hull
from .minima import successive_minima, zhang

__version__ = "0.1.0"

__all__ = [
    "ARCH",
    "Canonical",
    "CellwisePA",
    "DivisorSpec",
    "LogValue",
    "Place",
    "Polytope",
    "PrecisionExhausted",
    "PsiMetric",
    "RoofFn",
    "RoofMetric",
    "SmoothMetric",
    "concavify",
    "hull",
    "integrate",
    "lv_sign",
    "roof_eval",
    "successive_minima",
    "validate",
    "zhang",
]
