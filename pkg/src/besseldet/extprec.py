"""Double-double real scalar.

:class:`ExtReal` holds a value as the exact sum ``hi + lo`` of two float64
with ``|lo| <= ulp(hi)/2``, giving about 32 significant decimal digits.
Instances are immutable. Arithmetic accepts ``int``/``float`` operands on
either side.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from numbers import Real

from . import _dd

__all__ = [
    "ExtReal", "ExtPrecError", "ExtPrecDomainError", "ExtPrecRangeError",
    "add", "sub", "mul", "div", "neg", "sqrt", "compare",
    "exp", "expm1", "log", "sin", "cos", "sinh", "cosh", "sin_pi", "pow",
    "const_pi", "log_gamma_pos", "DIGITS",
]

DIGITS = 32
_EXP_MAX = 709.782712893384
_EXP_MIN = -708.3964185322641  # below this the trailing word is subnormal


class ExtPrecError(ArithmeticError):
    pass


class ExtPrecDomainError(ExtPrecError, ValueError):
    """Argument outside the mathematical domain (x/0, sqrt(-1), log(0))."""


class ExtPrecRangeError(ExtPrecError, OverflowError):
    """Result not representable in the float64 exponent range."""


class ExtReal:
    __slots__ = ("hi", "lo")

    def __init__(self, value=0.0):
        if isinstance(value, ExtReal):
            hi, lo = value.hi, value.lo
        elif isinstance(value, str):
            hi, lo = _dd._dd_of(Fraction(value.strip()))
        elif isinstance(value, (Fraction, int)) and not isinstance(value, bool):
            hi, lo = _dd._dd_of(Fraction(value))
        elif isinstance(value, Real):
            hi, lo = float(value), 0.0
        else:
            raise TypeError(f"cannot convert {type(value).__name__} to ExtReal")
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo", lo)

    @classmethod
    def from_parts(cls, hi: float, lo: float = 0.0) -> ExtReal:
        """Build from an arbitrary float pair, renormalizing it."""
        h, l = _dd.two_sum(float(hi), float(lo))
        return cls._raw(h, l)

    @classmethod
    def _raw(cls, hi, lo):
        self = object.__new__(cls)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo", lo)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("ExtReal is immutable")

    def __reduce__(self):
        return (ExtReal._raw, (self.hi, self.lo))

    # -- conversions ------------------------------------------------------
    def __float__(self):
        return self.hi

    def __int__(self):
        return int(self.to_fraction())

    def __bool__(self):
        return self.hi != 0.0

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def is_finite(self) -> bool:
        return math.isfinite(self.hi) and math.isfinite(self.lo)

    def is_integer(self) -> bool:
        return self.is_finite() and float(self.hi).is_integer() and float(self.lo).is_integer()

    def hex(self) -> str:
        """Debug dump of both words."""
        return f"({self.hi.hex()}, {self.lo.hex()})"

    def __format__(self, spec):
        if not spec:
            return str(self)
        return format(self.hi, spec)

    def __str__(self):
        return self.to_decimal_string(DIGITS)

    def __repr__(self):
        return f"ExtReal('{self}')"

    def to_decimal_string(self, digits: int = DIGITS) -> str:
        if not self.is_finite():
            return repr(self.hi)
        if self.hi == 0.0:
            return "0"
        with localcontext() as ctx:
            ctx.prec = 1200
            exact = Decimal(self.hi) + Decimal(self.lo)
            return f"{exact:.{digits - 1}e}"

    @classmethod
    def parse(cls, text: str) -> ExtReal:
        return cls(text)

    # -- arithmetic -------------------------------------------------------
    def __neg__(self):
        return ExtReal._raw(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.hi < 0.0 else self

    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return ExtReal._raw(*_dd.dd_add(self.hi, self.lo, o.hi, o.lo))

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return ExtReal._raw(*_dd.dd_sub(self.hi, self.lo, o.hi, o.lo))

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return ExtReal._raw(*_dd.dd_mul(self.hi, self.lo, o.hi, o.lo))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if o.hi == 0.0:
            raise ExtPrecDomainError("division by zero")
        return ExtReal._raw(*_dd.dd_div(self.hi, self.lo, o.hi, o.lo))

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, p):
        return pow(self, p)

    # -- comparison on the exact sum --------------------------------------
    def _cmp(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        d = _dd.dd_sub(self.hi, self.lo, o.hi, o.lo)[0]
        return (d > 0.0) - (d < 0.0)

    def __eq__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __hash__(self):
        if self.lo == 0.0:
            return hash(self.hi)
        return hash((self.hi, self.lo))


def _coerce(x):
    if isinstance(x, ExtReal):
        return x
    if isinstance(x, float):
        return ExtReal._raw(x, 0.0)
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return ExtReal(x)
    if isinstance(x, Real):
        return ExtReal._raw(float(x), 0.0)
    return NotImplemented


def as_ext(x) -> ExtReal:
    """Coerce int/float/str/ExtReal to ExtReal."""
    if isinstance(x, ExtReal):
        return x
    return ExtReal(x)


def _check(x: ExtReal, what: str) -> ExtReal:
    if not x.is_finite():
        raise ExtPrecRangeError(f"{what}: result out of range")
    return x


# -- functional interface ---------------------------------------------------

def add(a, b):
    return as_ext(a) + b


def sub(a, b):
    return as_ext(a) - b


def mul(a, b):
    return as_ext(a) * b


def div(a, b):
    return as_ext(a) / b


def neg(a):
    return -as_ext(a)


def compare(a, b) -> int:
    return as_ext(a)._cmp(b)


def sqrt(a) -> ExtReal:
    a = as_ext(a)
    if a.hi < 0.0:
        raise ExtPrecDomainError("sqrt of a negative number")
    return ExtReal._raw(*_dd.dd_sqrt(a.hi, a.lo))


def exp(a) -> ExtReal:
    a = as_ext(a)
    if a.hi > _EXP_MAX or a.hi < _EXP_MIN:
        raise ExtPrecRangeError(f"exp({a.hi!r}) out of range")
    return _check(ExtReal._raw(*_dd.dd_exp(a.hi, a.lo)), "exp")


def expm1(a) -> ExtReal:
    a = as_ext(a)
    if a.hi > _EXP_MAX:
        raise ExtPrecRangeError(f"expm1({a.hi!r}) out of range")
    if a.hi < _EXP_MIN:
        return ExtReal(-1.0)
    return _check(ExtReal._raw(*_dd.dd_expm1(a.hi, a.lo)), "expm1")


def log(a) -> ExtReal:
    a = as_ext(a)
    if a.hi <= 0.0:
        raise ExtPrecDomainError("log of a non-positive number")
    if not a.is_finite():
        raise ExtPrecRangeError("log of a non-finite number")
    return ExtReal._raw(*_dd.dd_log(a.hi, a.lo))


def sin(a) -> ExtReal:
    a = as_ext(a)
    s = _dd.dd_sincos(a.hi, a.lo)
    return ExtReal._raw(s[0], s[1])


def cos(a) -> ExtReal:
    a = as_ext(a)
    s = _dd.dd_sincos(a.hi, a.lo)
    return ExtReal._raw(s[2], s[3])


def sin_pi(a) -> ExtReal:
    """sin(pi*a) with exact integer reduction of ``a``."""
    a = as_ext(a)
    return ExtReal._raw(*_dd.dd_sin_pi(a.hi, a.lo))


def sinh(a) -> ExtReal:
    a = as_ext(a)
    if abs(a.hi) > _EXP_MAX:
        raise ExtPrecRangeError("sinh out of range")
    return _check(ExtReal._raw(*_dd.dd_sinh(a.hi, a.lo)), "sinh")


def cosh(a) -> ExtReal:
    a = as_ext(a)
    if abs(a.hi) > _EXP_MAX:
        raise ExtPrecRangeError("cosh out of range")
    return _check(ExtReal._raw(*_dd.dd_cosh(a.hi, a.lo)), "cosh")


def pow(a, p) -> ExtReal:
    """a**p. Integer p uses repeated squaring (any sign of a); otherwise a > 0."""
    a = as_ext(a)
    if isinstance(p, int) or (isinstance(p, (float, ExtReal)) and as_ext(p).is_integer()
                              and abs(float(p)) < 2 ** 31):
        k = int(as_ext(p))
        if k < 0:
            if a.hi == 0.0:
                raise ExtPrecDomainError("zero to a negative power")
            return _check(ExtReal(1.0) / pow(a, -k), "pow")
        result, base = ExtReal(1.0), a
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return _check(result, "pow")
    if a.hi < 0.0:
        raise ExtPrecDomainError("negative base with non-integer exponent")
    if a.hi == 0.0:
        return ExtReal(0.0)
    return exp(as_ext(p) * log(a))


def const_pi() -> ExtReal:
    return ExtReal._raw(_dd.PI_HI, _dd.PI_LO)


def log_gamma_pos(x) -> ExtReal:
    """ln Gamma(x) for real x > 0."""
    x = as_ext(x)
    if x.hi <= 0.0:
        raise ExtPrecDomainError("log_gamma_pos requires x > 0")
    if not x.is_finite():
        raise ExtPrecRangeError("log_gamma_pos of a non-finite number")
    if x.lo == 0.0 and x.hi in (1.0, 2.0):
        # exact zeros of ln Gamma; the shifted Stirling sum only gets within rounding
        return ExtReal(0.0)
    return ExtReal._raw(*_dd.dd_lgamma_pos(x.hi, x.lo))
