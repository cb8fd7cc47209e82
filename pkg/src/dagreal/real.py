"""Exact-decision real numbers: a double-interval filter over an expression dag.

An ExactReal carries an outward-rounded hardware interval that always
encloses the true value, plus a reference into the dag recording how the
value was built.  Accuracy requests that the interval already answers never
touch bigfloat machinery; everything else falls back to (optionally
balanced) adaptive evaluation.
"""

from __future__ import annotations

import math
from fractions import Fraction

from gmpy2 import mpfr

from .balancing import balance_dag
from .errors import DomainError, EvaluationError
from .evaluation import BalanceMode, EvalConfig, EvalMetrics, evaluate
from .nodes import Approximation, DagNode, OpKind, depth, make_leaf, make_node
from .rounding import (
    ceil_log2_fraction,
    iv_add,
    iv_div,
    iv_mul,
    iv_neg,
    iv_sqrt,
    iv_sub,
    pow2_fraction,
)

_IV_BINARY = {
    OpKind.ADD: iv_add,
    OpKind.SUB: iv_sub,
    OpKind.MUL: iv_mul,
    OpKind.DIV: iv_div,
}


class ExactReal:
    """Handle to a real value with guaranteed enclosure.

    Handles count toward their root node's reference count, which is what
    keeps the balancer from dismantling a subexpression the user can still
    reach.  CPython's prompt finalization releases the count as soon as the
    handle dies.
    """

    __slots__ = ("_node",)

    def __init__(self, value):
        node = make_leaf(value)
        node.ref_count += 1
        object.__setattr__(self, "_node", node)

    @classmethod
    def _from_node(cls, node: DagNode) -> "ExactReal":
        self = object.__new__(cls)
        node.ref_count += 1
        object.__setattr__(self, "_node", node)
        return self

    def __del__(self):
        try:
            self._node.ref_count -= 1
        except AttributeError:
            pass

    @property
    def node(self) -> DagNode:
        return self._node

    @property
    def interval(self) -> tuple[float, float]:
        return self._node.interval

    def __repr__(self) -> str:
        lo, hi = self._node.interval
        return f"ExactReal[{lo!r}, {hi!r}]"

    # -- construction of compound expressions --------------------------------

    def _wrap(self, other):
        if isinstance(other, ExactReal):
            return other
        if isinstance(other, (int, float)):
            return ExactReal(other)
        return None

    def __add__(self, other):
        other = self._wrap(other)
        return NotImplemented if other is None else arith(OpKind.ADD, self, other)

    def __radd__(self, other):
        other = self._wrap(other)
        return NotImplemented if other is None else arith(OpKind.ADD, other, self)

    def __sub__(self, other):
        other = self._wrap(other)
        return NotImplemented if other is None else arith(OpKind.SUB, self, other)

    def __rsub__(self, other):
        other = self._wrap(other)
        return NotImplemented if other is None else arith(OpKind.SUB, other, self)

    def __mul__(self, other):
        other = self._wrap(other)
        return NotImplemented if other is None else arith(OpKind.MUL, self, other)

    def __rmul__(self, other):
        other = self._wrap(other)
        return NotImplemented if other is None else arith(OpKind.MUL, other, self)

    def __truediv__(self, other):
        other = self._wrap(other)
        return NotImplemented if other is None else arith(OpKind.DIV, self, other)

    def __rtruediv__(self, other):
        other = self._wrap(other)
        return NotImplemented if other is None else arith(OpKind.DIV, other, self)

    def __neg__(self):
        return arith(OpKind.NEG, self)

    def sqrt(self) -> "ExactReal":
        return arith(OpKind.SQRT, self)

    # -- accuracy guarantee ---------------------------------------------------

    def guarantee_absolute_error_two_to(
        self,
        neg_q: int,
        cfg: EvalConfig | None = None,
        metrics: EvalMetrics | None = None,
    ) -> Approximation:
        """Return an approximation with |true - value| <= 2**neg_q.

        If the filter interval is already narrow enough its midpoint is
        returned and no dag state changes.  Otherwise the dag is balanced
        (once per node, if the config asks for it) and evaluated with the
        configured strategy.
        """
        cfg = cfg or EvalConfig()
        q = -int(neg_q)
        node = self._node
        filtered = _filter_midpoint(node.interval, q)
        if filtered is not None:
            return filtered
        if metrics is None:
            metrics = EvalMetrics()
        if cfg.balance_mode is not BalanceMode.NONE:
            balance_dag(node, cfg, metrics)
        else:
            d = depth(node)
            metrics.depth_before = max(metrics.depth_before, d)
            metrics.depth_after = max(metrics.depth_after, d)
        approx = evaluate(node, q, cfg, metrics)
        if not approx.satisfies(q):
            raise EvaluationError(
                f"certified error 2^{approx.error_exp} misses target 2^-{q}", node
            )
        return approx


def arith(op: OpKind, a: ExactReal, b: ExactReal | None = None) -> ExactReal:
    """Apply an operation, combining intervals outward and extending the dag."""
    if op in (OpKind.ADD, OpKind.SUB, OpKind.MUL, OpKind.DIV):
        if b is None:
            raise ValueError(f"{op.value} is binary")
        iv = _IV_BINARY[op](a.interval, b.interval)
        return ExactReal._from_node(make_node(op, [a.node, b.node], interval=iv))
    if b is not None:
        raise ValueError(f"{op.value} is unary")
    if op is OpKind.NEG:
        return ExactReal._from_node(make_node(op, [a.node], interval=iv_neg(a.interval)))
    if op is OpKind.SQRT:
        if a.interval[1] < 0:
            raise DomainError(f"sqrt of an interval below zero: {a.interval}")
        return ExactReal._from_node(make_node(op, [a.node], interval=iv_sqrt(a.interval)))
    raise ValueError(f"cannot apply {op.value}")


def sqrt(x: ExactReal) -> ExactReal:
    return x.sqrt()


def _filter_midpoint(interval: tuple[float, float], q: int) -> Approximation | None:
    """Midpoint approximation when the interval alone certifies accuracy q."""
    lo, hi = interval
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return None
    width = Fraction(hi) - Fraction(lo)
    if width > pow2_fraction(-q):
        return None
    if width == 0:
        return Approximation(mpfr(lo), None)
    mid = lo + (hi - lo) / 2.0
    err = max(Fraction(hi) - Fraction(mid), Fraction(mid) - Fraction(lo))
    return Approximation(mpfr(mid), ceil_log2_fraction(err))
