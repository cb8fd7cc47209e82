import math
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr

from dagreal import (
    BalanceMode,
    DivisorNotSeparatedError,
    DomainError,
    EvalConfig,
    EvalMetrics,
    ExactReal,
    OpKind,
    Strategy,
    arith,
    depth,
    iter_nodes,
    naive_eval,
    sqrt,
)
from dagreal.oracle import within_tolerance


def test_arith_add_trivial():
    r = arith(OpKind.ADD, ExactReal(1), ExactReal(1))
    lo, hi = r.interval
    assert lo <= 2 <= hi
    assert depth(r.node) == 1


def test_arith_sqrt_interval_window():
    r = arith(OpKind.SQRT, ExactReal(2))
    lo, hi = r.interval
    assert lo == 1.4142135623730949
    assert hi == 1.4142135623730951


def test_arith_div_then_sqrt():
    r = sqrt(ExactReal(13) / ExactReal(64))
    lo, hi = r.interval
    # sqrt(0.203125) = 0.45069390943299864...
    assert Fraction(lo) ** 2 <= Fraction(13, 64) <= Fraction(hi) ** 2
    assert lo <= 0.45069390943299864 <= hi
    assert hi - lo < 1e-15


def test_sqrt_negative_interval_rejected():
    with pytest.raises(DomainError):
        ExactReal(-4).sqrt()


def test_sqrt_interval_straddling_zero_allowed():
    x = ExactReal(1) - ExactReal(1)
    x.sqrt()  # interval [~0, ~0] includes zero; construction is fine


def test_operators_and_scalars():
    x = ExactReal(3)
    y = 1 + x * 2 - 0.5
    approx = y.guarantee_absolute_error_two_to(-20)
    assert abs(float(approx.value) - 6.5) < 2**-20
    z = 1 / ExactReal(4)
    assert abs(float(z.guarantee_absolute_error_two_to(-20).value) - 0.25) < 2**-20
    neg = -ExactReal(7)
    assert float(neg.guarantee_absolute_error_two_to(-10).value) == -7.0


def test_guarantee_leaf_filter_exact():
    a = ExactReal(5).guarantee_absolute_error_two_to(-10)
    assert a.is_exact
    assert a.value == 5


def test_guarantee_sqrt2_q30():
    x = ExactReal(2).sqrt()
    a = x.guarantee_absolute_error_two_to(-30)
    ref = gmpy2.context(precision=120).sqrt(mpfr(2))
    assert abs(mpfr(a.value, 200) - ref) <= mpfr(2) ** -30


def test_guarantee_telescoping_exact_value():
    prod = ExactReal(1)
    for i in range(1, 5):
        prod = prod * (ExactReal(i + 1) / ExactReal(i))
    a = prod.guarantee_absolute_error_two_to(-10)
    assert abs(mpfr(a.value, 100) - 5) <= mpfr(2) ** -10


def test_filter_short_circuit_leaves_dag_untouched():
    x = ExactReal(2).sqrt() + ExactReal(3).sqrt()
    flags_before = [n.evaluated for n in iter_nodes(x.node)]
    x.guarantee_absolute_error_two_to(-10)  # interval width ~1 ulp suffices
    assert [n.evaluated for n in iter_nodes(x.node)] == flags_before


def test_guarantee_idempotent_no_recompute():
    x = ExactReal(2).sqrt() + ExactReal(3).sqrt()
    cfg = EvalConfig()
    m1 = EvalMetrics()
    x.guarantee_absolute_error_two_to(-200, cfg, m1)
    assert m1.recompute_total > 0
    m2 = EvalMetrics()
    x.guarantee_absolute_error_two_to(-200, cfg, m2)
    assert m2.recompute_total == 0


def test_negative_q_accepted():
    x = ExactReal(1000) + ExactReal(1)
    a = x.guarantee_absolute_error_two_to(5)  # error bound 2**5
    assert abs(float(a.value) - 1001) <= 32


def test_division_by_exact_zero_fails():
    zero = ExactReal(1) - ExactReal(1)
    bad = ExactReal(1) / zero
    cfg = EvalConfig(max_precision=1 << 12)
    with pytest.raises(DivisorNotSeparatedError) as info:
        bad.guarantee_absolute_error_two_to(-64, cfg)
    assert info.value.node is not None


def test_division_by_tiny_but_nonzero_succeeds():
    # (1 + 2**-80) - 1 is far below the filter's resolution but nonzero,
    # so the divisor separation has to escalate precision to resolve it.
    tiny = (ExactReal(1) + ExactReal(2.0**-80)) - ExactReal(1)
    x = ExactReal(1) / tiny
    a = x.guarantee_absolute_error_two_to(-20)
    assert abs(mpfr(a.value, 200) - mpfr(2) ** 80) <= mpfr(2) ** -20


def test_enclosure_random_expressions():
    import random

    rng = random.Random(42)
    for trial in range(120):
        value = Fraction(rng.randint(-32, 32), 2 ** rng.randint(0, 4))
        expr = ExactReal(float(value))
        for _ in range(rng.randint(1, 6)):
            pick = rng.random()
            operand = Fraction(rng.randint(-16, 16), 2 ** rng.randint(0, 3))
            if pick < 0.3:
                expr, value = expr + ExactReal(float(operand)), value + operand
            elif pick < 0.55:
                expr, value = expr - ExactReal(float(operand)), value - operand
            elif pick < 0.8:
                expr, value = expr * ExactReal(float(operand)), value * operand
            elif operand != 0:
                expr, value = expr / ExactReal(float(operand)), value / operand
        lo, hi = expr.interval
        assert Fraction(lo) <= value <= Fraction(hi)
        a = expr.guarantee_absolute_error_two_to(-40)
        err = abs(mpfr(a.value, 300) - mpfr(value.numerator) / mpfr(value.denominator, 300))
        bound = mpfr(0) if a.error_exp is None else mpfr(2) ** a.error_exp
        assert err <= bound
        assert bound <= mpfr(2) ** -40


def test_strategy_equivalence_on_guarantee():
    for strategy in Strategy:
        x = (ExactReal(13) / ExactReal(64)).sqrt() + ExactReal(5).sqrt()
        cfg = EvalConfig(strategy=strategy, balance_mode=BalanceMode.ALL)
        a = x.guarantee_absolute_error_two_to(-150, cfg)
        ref = naive_eval(x.node, 400)
        assert within_tolerance(a, ref, 150)
