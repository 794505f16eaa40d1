"""
Extended-exponent arithmetic for orbit magnitudes.

Orbits of the attracting sequences shrink like c^(2^n), which leaves the
native double range after a dozen steps. Values here keep a native mantissa
in [1, 2) and a separate signed 64-bit binary exponent, so only the dynamic
range is extended; relative precision stays at double precision.

Usage:
    from core.num_core import from_native, ext_mul, log_modulus
    z = from_native(0.1 + 0.2j)
    log_modulus(ext_mul(z, z)).value
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

from .errors import NonFiniteInputError

EXP_MAX = 2 ** 63 - 1
MANT_BITS = 53
# beyond this exponent gap the smaller addend cannot move the larger one
ADD_GAP = 64 + MANT_BITS
LN2 = math.log(2.0)


# ---------------------------------------------------------------------
# Real part
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ExtReal:
    """sign * mantissa * 2**exp2; sign 0 means exactly zero."""

    sign: int
    mantissa: float
    exp2: int
    overflow: bool = False

    @property
    def signed_mantissa(self) -> float:
        return self.sign * self.mantissa

    def is_zero(self) -> bool:
        return self.sign == 0 and not self.overflow


ZERO_R = ExtReal(0, 0.0, 0)
ONE_R = ExtReal(1, 1.0, 0)


def _overflowed(sign: int) -> ExtReal:
    return ExtReal(sign if sign else 1, 1.0, EXP_MAX, True)


def _norm(x: float, exp2: int) -> ExtReal:
    """Renormalise x * 2**exp2 into mantissa [1, 2)."""
    if x == 0.0:
        return ZERO_R
    m, k = math.frexp(x)
    e = exp2 + k - 1
    sign = 1 if m > 0 else -1
    if e > EXP_MAX:
        return _overflowed(sign)
    if e < -EXP_MAX:
        return ZERO_R
    return ExtReal(sign, abs(m) * 2.0, e)


def real_from_float(x: float) -> ExtReal:
    if not math.isfinite(x):
        raise NonFiniteInputError(f"cannot embed non-finite value {x!r}")
    return _norm(float(x), 0)


def real_to_float(a: ExtReal) -> float:
    if a.overflow:
        return math.copysign(math.inf, a.sign)
    if a.sign == 0:
        return 0.0
    try:
        return math.ldexp(a.signed_mantissa, a.exp2)
    except OverflowError:
        return math.copysign(math.inf, a.sign)


def real_add(a: ExtReal, b: ExtReal) -> ExtReal:
    if a.overflow or b.overflow:
        return a if a.overflow else b
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    if a.exp2 < b.exp2:
        a, b = b, a
    gap = a.exp2 - b.exp2
    if gap > ADD_GAP:
        return a
    s = a.signed_mantissa + math.ldexp(b.signed_mantissa, -gap)
    return _norm(s, a.exp2)


def real_mul(a: ExtReal, b: ExtReal) -> ExtReal:
    if a.overflow or b.overflow:
        if a.sign == 0 or b.sign == 0:
            return ZERO_R
        return _overflowed(a.sign * b.sign)
    if a.sign == 0 or b.sign == 0:
        return ZERO_R
    return _norm(a.signed_mantissa * b.signed_mantissa, a.exp2 + b.exp2)


def real_neg(a: ExtReal) -> ExtReal:
    return ExtReal(-a.sign, a.mantissa, a.exp2, a.overflow)


def real_scale2(a: ExtReal, k: int) -> ExtReal:
    if a.overflow or a.sign == 0:
        return a
    e = a.exp2 + k
    if e > EXP_MAX:
        return _overflowed(a.sign)
    if e < -EXP_MAX:
        return ZERO_R
    return ExtReal(a.sign, a.mantissa, e)


# ---------------------------------------------------------------------
# Complex values
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ExtComplex:
    re: ExtReal
    im: ExtReal

    @property
    def overflow(self) -> bool:
        return self.re.overflow or self.im.overflow

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def __add__(self, other: "ExtComplex") -> "ExtComplex":
        return ext_add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other: "ExtComplex") -> "ExtComplex":
        return ext_sub(self, _coerce(other))

    def __rsub__(self, other: "ExtComplex") -> "ExtComplex":
        return ext_sub(_coerce(other), self)

    def __mul__(self, other: "ExtComplex") -> "ExtComplex":
        return ext_mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other: "ExtComplex") -> "ExtComplex":
        return ext_div(self, _coerce(other))

    def __neg__(self) -> "ExtComplex":
        return ext_neg(self)

    def __complex__(self) -> complex:
        return to_native(self)


ZERO = ExtComplex(ZERO_R, ZERO_R)
ONE = ExtComplex(ONE_R, ZERO_R)

Native = Union[int, float, complex, Tuple[float, float]]


def from_native(x: Native) -> ExtComplex:
    """Exact embedding of a native complex (or (re, im) pair)."""
    if isinstance(x, ExtComplex):
        return x
    if isinstance(x, tuple):
        re, im = float(x[0]), float(x[1])
    else:
        c = complex(x)
        re, im = c.real, c.imag
    if not (math.isfinite(re) and math.isfinite(im)):
        raise NonFiniteInputError(f"cannot embed non-finite value {x!r}")
    return ExtComplex(_norm(re, 0), _norm(im, 0))


def _coerce(x) -> ExtComplex:
    return x if isinstance(x, ExtComplex) else from_native(x)


def to_native(z: ExtComplex) -> complex:
    return complex(real_to_float(z.re), real_to_float(z.im))


def ext_add(a: ExtComplex, b: ExtComplex) -> ExtComplex:
    return ExtComplex(real_add(a.re, b.re), real_add(a.im, b.im))


def ext_neg(a: ExtComplex) -> ExtComplex:
    return ExtComplex(real_neg(a.re), real_neg(a.im))


def ext_sub(a: ExtComplex, b: ExtComplex) -> ExtComplex:
    return ext_add(a, ext_neg(b))


def ext_mul(a: ExtComplex, b: ExtComplex) -> ExtComplex:
    re = real_add(real_mul(a.re, b.re), real_neg(real_mul(a.im, b.im)))
    im = real_add(real_mul(a.re, b.im), real_mul(a.im, b.re))
    return ExtComplex(re, im)


def ext_scale2(a: ExtComplex, k: int) -> ExtComplex:
    return ExtComplex(real_scale2(a.re, k), real_scale2(a.im, k))


def _split(z: ExtComplex) -> Tuple[complex, int]:
    """Return (w, e) with z == w * 2**e and max(|Re w|, |Im w|) in [1, 2)."""
    parts = [p for p in (z.re, z.im) if p.sign != 0]
    if not parts:
        return 0j, 0
    e = max(p.exp2 for p in parts)

    def _shift(p: ExtReal) -> float:
        if p.sign == 0:
            return 0.0
        return math.ldexp(p.signed_mantissa, p.exp2 - e)

    return complex(_shift(z.re), _shift(z.im)), e


def ext_div(a: ExtComplex, b: ExtComplex) -> ExtComplex:
    if b.is_zero():
        raise ZeroDivisionError("extended complex division by zero")
    if a.overflow or b.overflow:
        if b.overflow and not a.overflow:
            return ZERO
        return ExtComplex(_overflowed(1), ZERO_R)
    if a.is_zero():
        return ZERO
    wa, ea = _split(a)
    wb, eb = _split(b)
    return ext_scale2(from_native(wa / wb), ea - eb)


# ---------------------------------------------------------------------
# Log magnitudes
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class LogMag:
    """Natural log of a magnitude; -inf marks zero, +inf marks escape."""

    value: float

    @classmethod
    def zero(cls) -> "LogMag":
        return cls(-math.inf)

    @classmethod
    def escaped(cls) -> "LogMag":
        return cls(math.inf)

    @classmethod
    def of(cls, x: float) -> "LogMag":
        if x < 0 or not math.isfinite(x):
            raise NonFiniteInputError(f"LogMag needs a finite non-negative value, got {x!r}")
        return cls(math.log(x)) if x > 0 else cls.zero()

    def is_zero(self) -> bool:
        return self.value == -math.inf

    def is_escape(self) -> bool:
        return self.value == math.inf

    def native(self) -> float:
        """exp(value), flushing to 0.0 / inf outside the double range."""
        if self.value == -math.inf:
            return 0.0
        try:
            return math.exp(self.value)
        except OverflowError:
            return math.inf

    def to_ext(self) -> ExtComplex:
        if self.value == -math.inf:
            return ZERO
        if self.value == math.inf:
            return ExtComplex(_overflowed(1), ZERO_R)
        q = self.value / LN2
        if abs(q) > EXP_MAX:
            return ZERO if q < 0 else ExtComplex(_overflowed(1), ZERO_R)
        e = math.floor(q)
        m = math.exp(self.value - e * LN2)
        return ExtComplex(_norm(m, e), ZERO_R)

    def __lt__(self, other: "LogMag") -> bool:
        return self.value < other.value

    def __le__(self, other: "LogMag") -> bool:
        return self.value <= other.value


def log_modulus(a: ExtComplex) -> LogMag:
    if a.overflow:
        return LogMag.escaped()
    if a.is_zero():
        return LogMag.zero()
    w, e = _split(a)
    return LogMag(e * LN2 + math.log(abs(w)))


def ext_abs2(a: ExtComplex) -> ExtReal:
    """|a|^2 = re^2 + im^2, computed without leaving the extended range."""
    if a.overflow:
        return _overflowed(1)
    return real_add(real_mul(a.re, a.re), real_mul(a.im, a.im))


def ext_modulus(a: ExtComplex) -> ExtReal:
    if a.overflow:
        return _overflowed(1)
    w, e = _split(a)
    return _norm(abs(w), e)
