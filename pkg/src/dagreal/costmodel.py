"""Closed-form work predictors for list-shaped versus balanced operator trees.

The predictors return exact partial sums of the per-level cost series (all
hidden constants taken as 1), so they are meaningful for growth-rate
comparison against measured work-unit counters, not as absolute times.
An addition at accuracy a with result magnitude 2**m costs a + m units; a
multiplication costs (a + m) ** mul_exponent units, matching a Karatsuba
regime by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class CostParams:
    """Series parameters.

    n: operand count, q: requested fractional digits, e: maximum operand
    exponent, e_max: maximum exponent over the whole computation, c: guard
    bits per level.
    """

    n: int
    q: int
    e: int = 0
    e_max: int | None = None
    c: int = 2
    mul_exponent: float = field(default=math.log2(3))

    def __post_init__(self):
        if self.e_max is None:
            self.e_max = self.e
        if self.n < 1 or self.q < 0 or self.e < 0 or self.e_max < self.e:
            raise ValueError("need n >= 1, q >= 0, 0 <= e <= e_max")


def _balanced_levels(n: int):
    """Yield (level, node_count) pairs for a balanced tree with n-1 nodes."""
    remaining = n - 1
    level = 0
    while remaining > 0:
        k = min(1 << level, remaining)
        yield level, k
        remaining -= k
        level += 1


def predict_add_cost(p: CostParams, balanced: bool) -> float:
    """Summation work for n operands at accuracy q.

    Unbalanced: sum over levels i of q + i*c + e + log2(n - i); the i-th
    addition from the root aggregates n - i operands.  Balanced: level i
    holds up to 2**i additions at accuracy q + i*c with result magnitude
    e + log2(n) - i, truncated so the total operator count is n - 1.
    """
    n, q, e, c = p.n, p.q, p.e, p.c
    if not balanced:
        total = 0.0
        for i in range(n):
            total += q + i * c + e + (math.log2(n - i) if n - i > 1 else 0.0)
        return total
    log_n = math.log2(n) if n > 1 else 0.0
    total = 0.0
    for level, k in _balanced_levels(n):
        mag = e + max(log_n - level, 0.0)
        total += k * (q + level * c + mag)
    return total


def predict_mul_cost(p: CostParams, balanced: bool, bounded_exponent: bool = False) -> float:
    """Product work for n operands at accuracy q.

    With unbounded exponents the accuracy grows by c + e per list level and
    the result exponent by e per level; the balanced variant uses the level
    accuracy q + i*c + 2**(ceil(log2 n)+1) * e and result exponent
    2**(ceil(log2 n)-i) * e.  With a bounded exponent e_max every term is
    (q + i*(c + e_max) + e_max) ** mul_exponent.
    """
    n, q, e, c, mu = p.n, p.q, p.e, p.c, p.mul_exponent
    e_max = p.e_max
    if not balanced:
        total = 0.0
        for i in range(n):
            if bounded_exponent:
                base = q + i * (c + e_max) + e_max
            else:
                base = q + i * (c + e) + (n - i) * e
            total += float(base) ** mu
        return total
    lg = (n - 1).bit_length()  # ceil(log2 n)
    total = 0.0
    for level, k in _balanced_levels(n):
        if bounded_exponent:
            base = q + level * (c + e_max) + e_max
        else:
            base = q + level * c + (1 << (lg + 1)) * e + (1 << max(lg - level, 0)) * e
        total += k * float(base) ** mu
    return total
