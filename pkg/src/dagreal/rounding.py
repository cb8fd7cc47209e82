"""Directed-rounding helpers: outward double intervals and exact exponent math.

The interval layer stores enclosures as pairs of hardware doubles.  All
endpoint operations go through MPFR at 53-bit precision with directed
rounding, then through a compare-and-nudge conversion back to ``float`` so
that a lower bound never rounds up and an upper bound never rounds down
(``float(mpfr)`` alone rounds to nearest, which is unsafe for subnormals).
"""

from __future__ import annotations

import math
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

_INF = float("inf")

_DOWN53 = gmpy2.context(precision=53, round=gmpy2.RoundDown)
_UP53 = gmpy2.context(precision=53, round=gmpy2.RoundUp)

# Small-precision contexts for rigorous error-bound arithmetic.  Bounds are
# nonnegative, so rounding up always overestimates and rounding down always
# underestimates.
BOUND_UP = gmpy2.context(precision=32, round=gmpy2.RoundUp)
BOUND_DOWN = gmpy2.context(precision=32, round=gmpy2.RoundDown)


def float_down(x) -> float:
    """Largest double <= x (x is an mpfr or any exact comparable number)."""
    d = float(mpfr(x))
    if d > x:
        d = math.nextafter(d, -_INF)
    return d


def float_up(x) -> float:
    """Smallest double >= x."""
    d = float(mpfr(x))
    if d < x:
        d = math.nextafter(d, _INF)
    return d


def _guard(v: float, direction: int) -> float:
    # NaN appears only from inf arithmetic on degenerate endpoints; replace
    # with the unbounded endpoint for the requested direction.
    if math.isnan(v):
        return -_INF if direction < 0 else _INF
    return v


def iv_exact(value) -> tuple[float, float]:
    """Tightest double enclosure of an exact value (int/float/mpfr)."""
    return float_down(value), float_up(value)


def iv_neg(a: tuple[float, float]) -> tuple[float, float]:
    return -a[1], -a[0]


def iv_add(a, b) -> tuple[float, float]:
    lo = _guard(float_down(_DOWN53.add(mpfr(a[0]), mpfr(b[0]))), -1)
    hi = _guard(float_up(_UP53.add(mpfr(a[1]), mpfr(b[1]))), +1)
    return lo, hi


def iv_sub(a, b) -> tuple[float, float]:
    lo = _guard(float_down(_DOWN53.sub(mpfr(a[0]), mpfr(b[1]))), -1)
    hi = _guard(float_up(_UP53.sub(mpfr(a[1]), mpfr(b[0]))), +1)
    return lo, hi


def iv_mul(a, b) -> tuple[float, float]:
    if not all(map(math.isfinite, (*a, *b))):
        return -_INF, _INF
    pairs = [(a[0], b[0]), (a[0], b[1]), (a[1], b[0]), (a[1], b[1])]
    lo = min(_guard(float_down(_DOWN53.mul(mpfr(x), mpfr(y))), -1) for x, y in pairs)
    hi = max(_guard(float_up(_UP53.mul(mpfr(x), mpfr(y))), +1) for x, y in pairs)
    return lo, hi


def iv_div(a, b) -> tuple[float, float]:
    if b[0] <= 0.0 <= b[1] or not all(map(math.isfinite, (*a, *b))):
        return -_INF, _INF
    pairs = [(a[0], b[0]), (a[0], b[1]), (a[1], b[0]), (a[1], b[1])]
    lo = min(_guard(float_down(_DOWN53.div(mpfr(x), mpfr(y))), -1) for x, y in pairs)
    hi = max(_guard(float_up(_UP53.div(mpfr(x), mpfr(y))), +1) for x, y in pairs)
    return lo, hi


def iv_sqrt(a) -> tuple[float, float]:
    lo_in = max(a[0], 0.0)
    lo = _guard(float_down(_DOWN53.sqrt(mpfr(lo_in))), -1)
    hi = _INF if a[1] == _INF else _guard(float_up(_UP53.sqrt(mpfr(a[1]))), +1)
    return lo, hi


def pow2_fraction(e: int) -> Fraction:
    """2**e as an exact Fraction for any integer e."""
    if e >= 0:
        return Fraction(1 << e, 1)
    return Fraction(1, 1 << (-e))


def ceil_log2_fraction(x: Fraction) -> int:
    """Smallest integer e with x <= 2**e, for a positive fraction."""
    p, q = x.numerator, x.denominator
    # 2**(e-1) < p/q < 2**(e+1) for this initial estimate, so at most one
    # upward correction is needed.
    e = p.bit_length() - q.bit_length()
    if (p << max(0, -e)) > (q << max(0, e)):
        e += 1
    return e


def mpfr_ceil_exp(x) -> int:
    """Smallest integer e with |x| <= 2**e.  x must be a nonzero mpfr."""
    m, e = x.as_mantissa_exp()
    m = abs(int(m))
    bl = m.bit_length()
    if m == (1 << (bl - 1)):  # exact power of two
        return int(e) + bl - 1
    return int(e) + bl


def mpfr_floor_exp(x) -> int:
    """Largest integer e with 2**e <= |x|.  x must be a nonzero mpfr."""
    m, e = x.as_mantissa_exp()
    bl = abs(int(m)).bit_length()
    return int(e) + bl - 1


def float_ceil_exp(x: float) -> int:
    """Smallest integer e with |x| <= 2**e for a finite nonzero double."""
    m, k = math.frexp(x)  # |x| = |m| * 2**k with 0.5 <= |m| < 1
    return k - 1 if abs(m) == 0.5 else k


def float_floor_exp(x: float) -> int:
    """Largest integer e with 2**e <= |x| for a finite nonzero double."""
    return math.frexp(x)[1] - 1
