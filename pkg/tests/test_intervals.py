import math
import random
from fractions import Fraction

from dagreal.rounding import (
    ceil_log2_fraction,
    float_ceil_exp,
    float_down,
    float_floor_exp,
    float_up,
    iv_add,
    iv_div,
    iv_exact,
    iv_mul,
    iv_neg,
    iv_sqrt,
    iv_sub,
    pow2_fraction,
)


def contains(iv, frac):
    lo, hi = iv
    if math.isinf(lo) or math.isinf(hi):
        return (lo == -math.inf or Fraction(lo) <= frac) and (
            hi == math.inf or frac <= Fraction(hi)
        )
    return Fraction(lo) <= frac <= Fraction(hi)


def test_sqrt2_one_ulp_window():
    # The enclosure of sqrt([2,2]) must stay inside the one-ulp-outward
    # window around sqrt(2); directed rounding gives exactly that window.
    lo, hi = iv_sqrt((2.0, 2.0))
    assert lo == 1.4142135623730949
    assert hi == 1.4142135623730951
    assert hi == math.nextafter(lo, math.inf)
    assert Fraction(lo) ** 2 < 2 < Fraction(hi) ** 2


def test_exact_enclosure_of_double():
    assert iv_exact(0.5) == (0.5, 0.5)
    big = 10**400  # far beyond double range
    lo, hi = iv_exact(big)
    assert hi == math.inf
    assert lo <= big


def test_add_sub_outward():
    a, b = (1.0, 1.0), (0.1, 0.1)
    lo, hi = iv_add(a, b)
    assert contains((lo, hi), Fraction(1) + Fraction(0.1))
    lo, hi = iv_sub(a, b)
    assert contains((lo, hi), Fraction(1) - Fraction(0.1))


def test_div_through_zero_is_unbounded():
    assert iv_div((1.0, 2.0), (-1.0, 1.0)) == (-math.inf, math.inf)


def test_random_interval_ops_enclose_exact_rationals():
    rng = random.Random(7)
    ops = {
        "add": (iv_add, lambda a, b: a + b),
        "sub": (iv_sub, lambda a, b: a - b),
        "mul": (iv_mul, lambda a, b: a * b),
        "div": (iv_div, lambda a, b: a / b),
    }
    for _ in range(400):
        name = rng.choice(list(ops))
        ivop, exact = ops[name]
        xs = []
        for _ in range(2):
            lo = rng.uniform(-50, 50)
            hi = lo + abs(rng.gauss(0, 1))
            xs.append((lo, hi))
        a, b = xs
        if name == "div" and b[0] <= 0 <= b[1]:
            continue
        result = ivop(a, b)
        assert result[0] <= result[1]
        # endpoints of the inputs map inside the result
        for fa in (Fraction(a[0]), Fraction(a[1])):
            for fb in (Fraction(b[0]), Fraction(b[1])):
                assert contains(result, exact(fa, fb)), (name, a, b)


def test_sqrt_negative_clamps_to_zero():
    lo, hi = iv_sqrt((-1.0, 4.0))
    assert lo == 0.0
    assert hi >= 2.0


def test_neg():
    assert iv_neg((1.0, 2.0)) == (-2.0, -1.0)


def test_float_down_up_subnormals():
    import gmpy2
    from gmpy2 import mpfr

    tiny = mpfr(2) ** -1080  # below the subnormal rounding granularity
    d = float_down(tiny)
    u = float_up(tiny)
    assert Fraction(d) <= Fraction(2) ** -1080 <= Fraction(u)
    assert d < u


def test_exponent_helpers():
    assert float_ceil_exp(8.0) == 3
    assert float_ceil_exp(7.9) == 3
    assert float_ceil_exp(8.1) == 4
    assert float_floor_exp(8.0) == 3
    assert float_floor_exp(7.9) == 2
    assert ceil_log2_fraction(Fraction(1, 4)) == -2
    assert ceil_log2_fraction(Fraction(3, 8)) == -1
    assert ceil_log2_fraction(Fraction(1)) == 0
    assert pow2_fraction(-3) == Fraction(1, 8)
    assert pow2_fraction(4) == 16


def test_ceil_log2_fraction_random():
    rng = random.Random(11)
    for _ in range(300):
        fr = Fraction(rng.randint(1, 10**9), rng.randint(1, 10**9))
        e = ceil_log2_fraction(fr)
        assert fr <= pow2_fraction(e)
        assert fr > pow2_fraction(e - 1)
