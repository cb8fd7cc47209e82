"""Independent reference values: straightforward non-adaptive evaluation.

These code paths share nothing with the adaptive engine.  naive_eval walks a
dag bottom-up at one fixed precision; the experiment oracles compute the
known closed forms directly.  Precisions are padded far beyond the verified
tolerance so oracle error is negligible against 2**-q.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError
from .nodes import Approximation, DagNode, OpKind
from .rounding import BOUND_UP


def naive_eval(root: DagNode, precision: int) -> mpfr:
    """Evaluate every reachable node once at a fixed precision.

    Pure: no node state is touched.  Shared nodes are computed once.
    """
    ctx = gmpy2.context(precision=precision)
    memo: dict[int, mpfr] = {}
    stack: list[tuple[DagNode, bool]] = [(root, False)]
    while stack:
        node, ready = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if node.kind is OpKind.LEAF:
            memo[key] = mpfr(node.leaf_value, precision)
            continue
        if not ready:
            stack.append((node, True))
            for child in node.children:
                if id(child) not in memo:
                    stack.append((child, False))
            continue
        vals = [memo[id(c)] for c in node.children]
        kind = node.kind
        if kind is OpKind.NEG:
            memo[key] = ctx.minus(vals[0])
        elif kind is OpKind.SQRT:
            if vals[0] < 0:
                raise DomainError("sqrt of a negative value in naive evaluation")
            memo[key] = ctx.sqrt(vals[0])
        elif kind is OpKind.ADD:
            memo[key] = ctx.add(vals[0], vals[1])
        elif kind is OpKind.SUB:
            memo[key] = ctx.sub(vals[0], vals[1])
        elif kind is OpKind.MUL:
            memo[key] = ctx.mul(vals[0], vals[1])
        else:
            if vals[1] == 0:
                raise ZeroDivisionError("division by zero in naive evaluation")
            memo[key] = ctx.div(vals[0], vals[1])
    return memo[id(root)]


def sum_of_sqrts_value(n: int, q: int) -> mpfr:
    """Reference for sum(sqrt(i), i=1..n)."""
    prec = q + 64 + 2 * max(n, 2).bit_length() + 16
    ctx = gmpy2.context(precision=prec)
    total = mpfr(0, prec)
    for i in range(1, n + 1):
        total = ctx.add(total, ctx.sqrt(mpfr(i)))
    return total


def bin_coeff_value(n: int, q: int) -> mpfr:
    """Reference for the generalized binomial coefficient over sqrt(13)."""
    prec = q + 128 + 4 * max(n, 2).bit_length() + 16
    ctx = gmpy2.context(precision=prec)
    b = ctx.sqrt(mpfr(13))
    num = mpfr(1, prec)
    denom = mpfr(1, prec)
    for i in range(n):
        num = ctx.mul(num, ctx.sub(b, mpfr(i)))
        denom = ctx.mul(denom, mpfr(i + 1))
    return ctx.div(num, denom)


def geometric_sum_value(n: int, q: int) -> mpfr:
    """Reference for sum(r**i, i=0..n) with r = sqrt(13/64), via the closed
    form (1 - r**(n+1)) / (1 - r)."""
    prec = q + 96 + 2 * max(n, 2).bit_length() + 16
    ctx = gmpy2.context(precision=prec)
    r = ctx.sqrt(ctx.div(mpfr(13), mpfr(64)))
    power = mpfr(1, prec)
    base = r
    k = n + 1
    while k:
        if k & 1:
            power = ctx.mul(power, base)
        base = ctx.mul(base, base)
        k >>= 1
    return ctx.div(ctx.sub(mpfr(1), power), ctx.sub(mpfr(1), r))


def telescoping_value(n: int, start_index: int, q: int) -> mpfr:
    """Reference for prod((i+1)/i, i=start..n-1), which telescopes to n/start."""
    prec = q + 80
    ctx = gmpy2.context(precision=prec)
    return ctx.div(mpfr(n), mpfr(start_index))


def within_tolerance(approx: Approximation, reference: mpfr, q: int) -> bool:
    """|approx - reference| <= 2**-q plus a sliver for the oracle's own error."""
    a = approx.value
    prec = max(a.precision, reference.precision) + 8
    ctx = gmpy2.context(precision=prec)
    diff = abs(ctx.sub(a, reference))
    tol = BOUND_UP.add(mpfr(2) ** (-q), mpfr(2) ** (-q - 30))
    return diff <= tol
