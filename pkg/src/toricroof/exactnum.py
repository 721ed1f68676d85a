"""Exact numbers of the form q0 + sum_p q_p log(p) with rational coefficients.

Since 1 and the logarithms of the primes are linearly independent over Q,
such a number is zero exactly when all its coefficients vanish. Nonzero
values are signed by interval evaluation at increasing precision.
"""
from __future__ import annotations

import math
import re
import threading
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import mpmath
from sympy import factorint, isprime

__all__ = [
    "LogValue",
    "NEG_INF",
    "NegInfinity",
    "PrecisionExhausted",
    "FLOAT_TOL",
    "as_fraction",
    "lv_add",
    "lv_eval",
    "lv_from_log_rational",
    "lv_scale",
    "lv_sign",
    "value_sign",
    "value_float",
]

#: absolute tolerance used when signing plain floats (numeric roofs)
FLOAT_TOL = 1e-12

DEFAULT_START_BITS = 64
DEFAULT_MAX_BITS = 4096

_iv_lock = threading.Lock()


class PrecisionExhausted(ArithmeticError):
    """Raised when interval evaluation cannot decide a sign below the ceiling."""


def as_fraction(x) -> Fraction:
    """Convert an int, Fraction or rational string ("7/3") to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@lru_cache(maxsize=4096)
def _checked_prime(p: int) -> int:
    if not isprime(p):
        raise ValueError(f"{p} is not a prime")
    return p


class LogValue:
    """Immutable exact value ``const + sum(coeff * log(p))``.

    ``logs`` maps primes to nonzero Fractions; the canonical form never stores
    zero coefficients, so structural equality is real equality.
    """

    __slots__ = ("const", "logs", "_key")

    def __init__(self, const=0, logs=None):
        self.const = as_fraction(const)
        items = []
        if logs:
            for p, c in logs.items():
                c = as_fraction(c)
                if c:
                    items.append((_checked_prime(int(p)), c))
        items.sort()
        self.logs = dict(items)
        self._key = None

    @classmethod
    def _raw(cls, const: Fraction, logs: dict) -> "LogValue":
        # trusted constructor: logs already canonical (primes, nonzero)
        obj = cls.__new__(cls)
        obj.const = const
        obj.logs = logs
        obj._key = None
        return obj

    @classmethod
    def log(cls, q, coeff=1) -> "LogValue":
        return lv_from_log_rational(q, coeff)

    # -- structure -----------------------------------------------------
    def key(self):
        if self._key is None:
            self._key = (self.const, tuple(sorted(self.logs.items())))
        return self._key

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        if isinstance(other, LogValue):
            return self.key() == other.key()
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return not self.logs and self.const == other
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.logs and self.const == 0

    def is_rational(self) -> bool:
        return not self.logs

    def __bool__(self):
        return not self.is_zero()

    # -- arithmetic ----------------------------------------------------
    @staticmethod
    def _coerce(x) -> "LogValue":
        if isinstance(x, LogValue):
            return x
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            return LogValue._raw(Fraction(x), {})
        raise TypeError(
            f"cannot combine LogValue with {type(x).__name__}; exact and float values do not mix"
        )

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not o.logs:
            return LogValue._raw(self.const + o.const, self.logs)
        logs = dict(self.logs)
        for p, c in o.logs.items():
            s = logs.get(p, 0) + c
            if s:
                logs[p] = s
            else:
                logs.pop(p, None)
        return LogValue._raw(self.const + o.const, logs)

    __radd__ = __add__

    def __neg__(self):
        return LogValue._raw(-self.const, {p: -c for p, c in self.logs.items()})

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return o + (-self)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)) and not isinstance(c, bool):
            c = Fraction(c)
            if not c:
                return LogValue._raw(Fraction(0), {})
            return LogValue._raw(self.const * c, {p: v * c for p, v in self.logs.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, (int, Fraction)) and not isinstance(c, bool):
            return self * (1 / Fraction(c))
        return NotImplemented

    # -- order ---------------------------------------------------------
    def _cmp(self, other) -> int:
        if other is NEG_INF:
            return 1
        return lv_sign(self - self._coerce(other))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return value_float(self)

    # -- text ----------------------------------------------------------
    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"LogValue({self.to_text()!r})"

    def to_text(self) -> str:
        """Canonical text form, e.g. ``7/3·log(2)+1/2·log(3)``."""
        parts = []
        if self.const or not self.logs:
            parts.append(str(self.const))
        for p, c in sorted(self.logs.items()):
            if c == 1:
                term = f"log({p})"
            elif c == -1:
                term = f"-log({p})"
            else:
                term = f"{c}·log({p})"
            parts.append(term)
        out = parts[0]
        for t in parts[1:]:
            out += t if t.startswith("-") else "+" + t
        return out

    _TERM = re.compile(
        r"([+-]?)\s*(?:(\d+(?:/\d+)?)\s*[·*]?\s*)?(log\(\s*(\d+(?:/\d+)?)\s*\))?"
    )

    @classmethod
    def parse(cls, text: str) -> "LogValue":
        """Inverse of :meth:`to_text`; also accepts ``*`` and ``log(q)`` for rational q."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty LogValue text")
        pos = 0
        total = cls()
        while pos < len(s):
            m = cls._TERM.match(s, pos)
            if m is None or m.end() == pos or (m.group(2) is None and m.group(3) is None):
                raise ValueError(f"cannot parse LogValue {text!r} at offset {pos}")
            sign = -1 if m.group(1) == "-" else 1
            coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            if m.group(3):
                total = total + lv_from_log_rational(Fraction(m.group(4)), sign * coeff)
            else:
                total = total + sign * coeff
            pos = m.end()
        return total

    def to_json(self) -> dict:
        return {"const": str(self.const), "logs": {str(p): str(c) for p, c in sorted(self.logs.items())}}

    @classmethod
    def from_json(cls, obj) -> "LogValue":
        if isinstance(obj, str):
            return cls.parse(obj)
        if isinstance(obj, (int, Fraction)):
            return cls(obj)
        if not isinstance(obj, dict) or set(obj) - {"const", "logs"}:
            raise ValueError(f"malformed LogValue JSON: {obj!r}")
        return cls(Fraction(obj.get("const", "0")), {int(p): Fraction(c) for p, c in obj.get("logs", {}).items()})


class NegInfinity:
    """The value -inf of a roof function outside its polytope."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INF"

    __str__ = __repr__

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __float__(self):
        return -math.inf


NEG_INF = NegInfinity()


def lv_from_log_rational(q, r=1) -> LogValue:
    """Return ``r * log(q)`` for a positive rational q, spread over its prime factors."""
    q = as_fraction(q)
    r = as_fraction(r)
    if q <= 0:
        raise ValueError(f"log of non-positive rational {q}")
    logs: dict[int, Fraction] = {}
    if r:
        for p, e in factorint(q.numerator).items():
            logs[p] = logs.get(p, 0) + e * r
        for p, e in factorint(q.denominator).items():
            logs[p] = logs.get(p, 0) - e * r
    return LogValue._raw(Fraction(0), {p: c for p, c in sorted(logs.items()) if c})


def lv_add(a: LogValue, b: LogValue) -> LogValue:
    return a + b


def lv_scale(c, a: LogValue) -> LogValue:
    return a * as_fraction(c)


def _float_sign(a: LogValue):
    """Sign from double arithmetic when the result is far from the rounding error."""
    val = float(a.const)
    mag = abs(val)
    for p, c in a.logs.items():
        t = float(c) * math.log(p)
        val += t
        mag += abs(t)
    if abs(val) > 1e-12 * mag + 1e-300:
        return 1 if val > 0 else -1
    return None


def _interval(a: LogValue, bits: int):
    with _iv_lock:
        old = mpmath.iv.prec
        mpmath.iv.prec = bits
        try:
            x = mpmath.iv.mpf(a.const.numerator) / a.const.denominator
            for p, c in a.logs.items():
                x += mpmath.iv.mpf(c.numerator) / c.denominator * mpmath.iv.log(p)
            return x.a, x.b
        finally:
            mpmath.iv.prec = old


def lv_sign(a: LogValue, max_bits: int = DEFAULT_MAX_BITS) -> int:
    """Exact sign of a LogValue.

    Canonical zero gives 0. Otherwise the value is a nonzero real and is
    enclosed in intervals of doubling precision until 0 is excluded.
    """
    if not a.logs:
        return (a.const > 0) - (a.const < 0)
    fs = _float_sign(a)
    if fs is not None:
        return fs
    bits = DEFAULT_START_BITS
    while bits <= max_bits:
        lo, hi = _interval(a, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2
    raise PrecisionExhausted(f"sign of {a} undecided at {max_bits} bits")


def lv_eval(a: LogValue, bits: int = 64) -> tuple[float, float]:
    """Enclosing interval (lo, hi) of the real value of ``a`` as floats."""
    if bits < 24:
        raise ValueError("bits must be >= 24")
    if a.is_zero():
        return (0.0, 0.0)
    lo, hi = _interval(a, bits)
    flo, fhi = float(lo), float(hi)
    # float conversion rounds to nearest; widen by one ulp to stay enclosing
    return (math.nextafter(flo, -math.inf), math.nextafter(fhi, math.inf))


def value_float(v) -> float:
    """Float image of an exact or numeric value."""
    if isinstance(v, LogValue):
        s = float(v.const)
        for p, c in v.logs.items():
            s += float(c) * math.log(p)
        return s
    return float(v)


def value_sign(v) -> int:
    """Sign for any value kind: LogValue and rationals exactly, floats up to FLOAT_TOL."""
    if isinstance(v, LogValue):
        return lv_sign(v)
    if isinstance(v, float):
        if abs(v) <= FLOAT_TOL:
            return 0
        return 1 if v > 0 else -1
    if v is NEG_INF:
        return -1
    return (v > 0) - (v < 0)
