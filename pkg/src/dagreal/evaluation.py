"""Accuracy-driven bigfloat evaluation of expression dags.

Two strategies are provided.  Recursive evaluation walks the dag top-down,
raising child accuracies and recomputing on the way back up; nodes with
several parents may be recomputed many times.  Topological evaluation first
aggregates, per node, the maximum accuracy any parent will ever request and
then recomputes each stale node exactly once, in reverse topological order.

Every recomputation stores a certified absolute error bound (a power-of-two
exponent) derived from the children's stored bounds plus the rounding error
of the operation itself, so correctness never rests on the propagation
heuristics alone.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import gmpy2
from gmpy2 import mpfr

from .errors import (
    DivisorNotSeparatedError,
    EvaluationError,
    GraphCorruptionError,
    PrecisionOverflowError,
)
from .nodes import UNSET, Approximation, DagNode, OpKind, iter_nodes
from .rounding import (
    BOUND_DOWN,
    BOUND_UP,
    float_ceil_exp,
    float_floor_exp,
    mpfr_ceil_exp,
    mpfr_floor_exp,
)

# Effectively -infinity for exponent arithmetic (magnitude of an exact zero).
NEG_INF_EXP = -(10**9)

# Accuracy used when a magnitude bound must be bootstrapped from scratch.
BOOTSTRAP_BITS = 53


class Strategy(Enum):
    RECURSIVE = "recursive"
    TOPOLOGICAL = "topological"


class BalanceMode(Enum):
    NONE = "def"
    ADD = "add"
    MUL = "mul"
    ALL = "all"


@dataclass
class EvalConfig:
    """Knobs for one adaptive evaluation.

    guard_bits is the per-level accuracy increment c; values below 2 keep
    the propagation rules but may leave the certified bound one bit short
    of the requested target.
    """

    guard_bits: int = 2
    strategy: Strategy = Strategy.RECURSIVE
    balance_mode: BalanceMode = BalanceMode.NONE
    order_preserving: bool = False
    balance_threshold_factor: float = 1.0
    max_precision: int = 1 << 22
    mul_cost_exponent: float = math.log2(3)

    def __post_init__(self):
        if self.guard_bits < 1:
            raise ValueError("guard_bits must be >= 1")
        if self.balance_threshold_factor < 1:
            raise ValueError("balance_threshold_factor must be >= 1")
        if self.max_precision < 2:
            raise ValueError("max_precision must be >= 2")


@dataclass
class EvalMetrics:
    """Work counters and timers for one guarantee call.

    recompute_total counts recomputations issued by the evaluation strategy
    itself; bootstrap_evals counts the low-accuracy evaluations performed
    only to obtain magnitude bounds.  Cost units follow the operation count
    model: an addition performed at accuracy q with result z contributes
    q + max(0, ceil(log2 |z|)) units, a multiplication contributes the same
    base raised to mul_cost_exponent.
    """

    add_cost_units: float = 0.0
    mul_cost_units: float = 0.0
    recompute_total: int = 0
    recompute_per_node: dict = field(default_factory=dict)
    bootstrap_evals: int = 0
    balance_time: float = 0.0
    topo_sort_time: float = 0.0
    eval_time: float = 0.0
    depth_before: int = 0
    depth_after: int = 0
    trees_balanced: int = 0
    _bootstrap_nesting: int = 0

    @property
    def max_recompute_per_node(self) -> int:
        return max(self.recompute_per_node.values(), default=0)


_RN = gmpy2.context()  # reusable round-to-nearest context; precision mutated per op


def _pow2(e: int):
    return mpfr(2) ** e


# ---------------------------------------------------------------------------
# Magnitude bounds
# ---------------------------------------------------------------------------

def _approx_ub_exp(a: Approximation) -> int:
    v = a.value
    if a.error_exp is None:
        return NEG_INF_EXP if v == 0 else mpfr_ceil_exp(v)
    ub = BOUND_UP.add(BOUND_UP.abs(v), _pow2(a.error_exp))
    return mpfr_ceil_exp(ub)


def _approx_lb_exp(a: Approximation) -> int | None:
    v = a.value
    if a.error_exp is None:
        return None if v == 0 else mpfr_floor_exp(v)
    lb = BOUND_DOWN.sub(BOUND_DOWN.abs(v), _pow2(a.error_exp))
    if lb <= 0:
        return None
    return mpfr_floor_exp(lb)


def _interval_ub_exp(iv) -> int | None:
    m = max(abs(iv[0]), abs(iv[1]))
    if math.isinf(m):
        return None
    if m == 0.0:
        return NEG_INF_EXP
    return float_ceil_exp(m)


def _interval_lb_exp(iv) -> int | None:
    lo, hi = iv
    if lo > 0.0:
        m = lo
    elif hi < 0.0:
        m = abs(hi)
    else:
        return None
    if math.isinf(m):
        return None
    return float_floor_exp(m)


_GUARD = 1e-9  # absorbs float rounding in log2-bound arithmetic
_NEG_INF = float("-inf")


def _leaf_log2(v) -> float:
    m, e = v.as_mantissa_exp()
    return int(e) + math.log2(abs(int(m)))


def _structural_bounds(node: DagNode) -> None:
    """Fill mag_ub_hint / mag_lb_hint for every node under this one.

    Hints are base-2 log magnitude bounds kept as floats with a small
    outward guard (no bigfloat work): |value| <= 2**mag_ub_hint and, when
    mag_lb_hint is not None, |value| >= 2**mag_lb_hint.  Sums and
    differences get no lower bound (cancellation is unknowable
    structurally); a quotient gets no upper bound unless its divisor has a
    lower bound.  Values never change, so the hints are computed once.
    """
    stack = [(node, False)]
    while stack:
        n, ready = stack.pop()
        if n.mag_ub_hint is not UNSET:
            continue
        if n.kind is OpKind.LEAF:
            v = n.leaf_value
            if v == 0:
                n.mag_ub_hint, n.mag_lb_hint = _NEG_INF, None
            else:
                lg = _leaf_log2(v)
                n.mag_ub_hint = lg + _GUARD
                n.mag_lb_hint = lg - _GUARD
            continue
        if not ready:
            stack.append((n, True))
            for child in n.children:
                if child.mag_ub_hint is UNSET:
                    stack.append((child, False))
            continue
        kind = n.kind
        kids = n.children
        ub0, lb0 = kids[0].mag_ub_hint, kids[0].mag_lb_hint
        if kind is OpKind.NEG:
            n.mag_ub_hint, n.mag_lb_hint = ub0, lb0
        elif kind is OpKind.SQRT:
            n.mag_ub_hint = None if ub0 is None else ub0 / 2 + _GUARD
            n.mag_lb_hint = None if lb0 is None else lb0 / 2 - _GUARD
        else:
            ub1, lb1 = kids[1].mag_ub_hint, kids[1].mag_lb_hint
            if kind in (OpKind.ADD, OpKind.SUB):
                if ub0 is None or ub1 is None:
                    n.mag_ub_hint = None
                else:
                    hi, lo = max(ub0, ub1), min(ub0, ub1)
                    if lo == _NEG_INF:
                        n.mag_ub_hint = hi
                    elif hi - lo > 64:
                        n.mag_ub_hint = hi + _GUARD
                    else:
                        n.mag_ub_hint = hi + math.log2(1.0 + 2.0 ** (lo - hi)) + _GUARD
                n.mag_lb_hint = None
            elif kind is OpKind.MUL:
                n.mag_ub_hint = None if (ub0 is None or ub1 is None) else ub0 + ub1 + _GUARD
                n.mag_lb_hint = None if (lb0 is None or lb1 is None) else lb0 + lb1 - _GUARD
            else:  # DIV
                n.mag_ub_hint = None if (ub0 is None or lb1 is None) else ub0 - lb1 + _GUARD
                if lb0 is None or ub1 is None or ub1 == _NEG_INF:
                    n.mag_lb_hint = None
                else:
                    n.mag_lb_hint = lb0 - ub1 - _GUARD


def _hint_ub_int(node: DagNode) -> int | None:
    if node.mag_ub_hint is UNSET:
        _structural_bounds(node)
    u = node.mag_ub_hint
    if u is None:
        return None
    if u == _NEG_INF:
        return NEG_INF_EXP
    return math.ceil(u)


def _hint_lb_int(node: DagNode) -> int | None:
    if node.mag_lb_hint is UNSET:
        _structural_bounds(node)
    lb = node.mag_lb_hint
    if lb is None or lb == _NEG_INF:
        return None
    return math.floor(lb)


def ub_exp(node: DagNode) -> int | None:
    """Certified integer E with |value| <= 2**E, or None when unknown."""
    best = None
    if node.approx is not None:
        best = _approx_ub_exp(node.approx)
    if node.interval is not None:
        e = _interval_ub_exp(node.interval)
        if e is not None and (best is None or e < best):
            best = e
    e = _hint_ub_int(node)
    if e is not None and (best is None or e < best):
        best = e
    return best


def lb_exp(node: DagNode) -> int | None:
    """Certified integer L with |value| >= 2**L > 0, or None if not separated."""
    best = None
    if node.approx is not None:
        best = _approx_lb_exp(node.approx)
    if node.interval is not None:
        e = _interval_lb_exp(node.interval)
        if e is not None and (best is None or e > best):
            best = e
    e = _hint_lb_int(node)
    if e is not None and (best is None or e > best):
        best = e
    return best


def _bootstrap(node: DagNode, q: int, cfg: EvalConfig, metrics: EvalMetrics) -> None:
    metrics._bootstrap_nesting += 1
    try:
        _run_recursive(node, q, cfg, metrics)
    finally:
        metrics._bootstrap_nesting -= 1


def _next_separation_accuracy(node: DagNode, cfg: EvalConfig) -> int:
    """Accuracy to try next when a divisor is not yet separated from zero."""
    if node.is_exact and node.approx.value == 0:
        raise DivisorNotSeparatedError("division by an exactly zero subexpression", node)
    current = 0
    if node.approx is not None and node.approx.error_exp is not None:
        current = -node.approx.error_exp
    acc = max(64, 2 * current)
    if acc > cfg.max_precision:
        raise DivisorNotSeparatedError(
            f"divisor not separable from zero up to precision {cfg.max_precision}", node
        )
    return acc


def _missing_magnitudes(node: DagNode, cfg: EvalConfig) -> list[tuple[DagNode, int]]:
    """(child, accuracy) pairs still needed before the node's child-accuracy
    rules can be applied.  Empty when all magnitude bounds are available."""
    kind = node.kind
    missing = []
    if kind is OpKind.MUL:
        for child in node.children:
            if ub_exp(child) is None:
                missing.append((child, BOOTSTRAP_BITS))
    elif kind is OpKind.DIV:
        x, y = node.children
        if lb_exp(y) is None:
            missing.append((y, _next_separation_accuracy(y, cfg)))
        if ub_exp(x) is None:
            missing.append((x, BOOTSTRAP_BITS))
    return missing


def _ensure_ub(node: DagNode, cfg: EvalConfig, metrics: EvalMetrics) -> int:
    e = ub_exp(node)
    if e is not None:
        return e
    _bootstrap(node, BOOTSTRAP_BITS, cfg, metrics)
    e = ub_exp(node)
    assert e is not None
    return e


def _ensure_separated(node: DagNode, cfg: EvalConfig, metrics: EvalMetrics) -> int:
    """Positive lower-bound exponent for |node|, escalating precision as needed."""
    while True:
        e = lb_exp(node)
        if e is not None:
            return e
        _bootstrap(node, _next_separation_accuracy(node, cfg), cfg, metrics)


# ---------------------------------------------------------------------------
# Accuracy propagation
# ---------------------------------------------------------------------------

def required_child_accuracy(
    node: DagNode, q: int, cfg: EvalConfig, metrics: EvalMetrics | None = None
) -> list[int]:
    """Accuracies the children must reach so the node can reach accuracy q.

    Add/Sub/Neg children need q + c.  A multiplication child needs
    q + c + max(0, ceil(log2 ub(|sibling|))).  Division and square root use
    first-order propagation with clamped logs; the divisor additionally gets
    enough accuracy to stay separated from zero at recomputation time.
    Magnitude bounds come from the construction interval or the cached
    approximation, bootstrapping a low-accuracy evaluation when neither
    exists.
    """
    if metrics is None:
        metrics = EvalMetrics()
    c = cfg.guard_bits
    kind = node.kind
    if kind in (OpKind.ADD, OpKind.SUB):
        return [q + c, q + c]
    if kind is OpKind.NEG:
        return [q + c]
    if kind is OpKind.MUL:
        x, y = node.children
        ex = _ensure_ub(x, cfg, metrics)
        ey = _ensure_ub(y, cfg, metrics)
        return [q + c + max(ey, 0), q + c + max(ex, 0)]
    if kind is OpKind.DIV:
        x, y = node.children
        ly = _ensure_separated(y, cfg, metrics)
        ex = _ensure_ub(x, cfg, metrics)
        ax = q + c + max(-ly, 0)
        ay = max(q + c + max(ex - 2 * ly, 0), -ly + 2)
        return [ax, ay]
    if kind is OpKind.SQRT:
        (x,) = node.children
        lx = lb_exp(x)
        if lx is None:
            return [2 * (q + c)]
        return [max(q + c + max(-(lx // 2), 0), -lx + 1)]
    raise ValueError(f"leaf nodes have no children to propagate to")


def _result_ub_exp(node: DagNode) -> int:
    """Upper-bound exponent for the node's value, for choosing a precision."""
    own = ub_exp(node)
    kind = node.kind
    kids = node.children
    derived = None
    if kind in (OpKind.ADD, OpKind.SUB):
        ex = _approx_ub_exp(kids[0].approx)
        ey = _approx_ub_exp(kids[1].approx)
        derived = max(ex, ey) + 1
    elif kind is OpKind.NEG:
        derived = _approx_ub_exp(kids[0].approx)
    elif kind is OpKind.MUL:
        derived = _approx_ub_exp(kids[0].approx) + _approx_ub_exp(kids[1].approx)
    elif kind is OpKind.DIV:
        ly = _approx_lb_exp(kids[1].approx)
        if ly is not None:
            derived = _approx_ub_exp(kids[0].approx) - ly
    elif kind is OpKind.SQRT:
        ex = _approx_ub_exp(kids[0].approx)
        derived = (ex + 1) // 2 if ex > NEG_INF_EXP // 2 else NEG_INF_EXP
    candidates = [e for e in (own, derived) if e is not None]
    if not candidates:
        raise EvaluationError("no magnitude bound available for recomputation", node)
    return min(candidates)


# ---------------------------------------------------------------------------
# Recomputation
# ---------------------------------------------------------------------------

def _recompute(node: DagNode, q: int, cfg: EvalConfig, metrics: EvalMetrics) -> None:
    """Recompute the node's approximation to accuracy q and certify the bound."""
    if node.approx is not None and node.approx.satisfies(q):
        return
    kind = node.kind
    kids = node.children
    for child in kids:
        if child.approx is None:
            raise EvaluationError("child evaluated out of order", child)

    e_res = _result_ub_exp(node)
    p = max(2, e_res + q + max(cfg.guard_bits, 2) + 3)
    if p > cfg.max_precision:
        raise PrecisionOverflowError(
            f"needs precision {p} > max_precision {cfg.max_precision}", node
        )
    ctx = _RN
    ctx.precision = p
    ctx.clear_flags()

    xa = kids[0].approx
    ex = xa.error_exp
    if kind is OpKind.NEG:
        v = ctx.minus(xa.value)
    elif kind is OpKind.SQRT:
        v, err = _sqrt_with_bound(ctx, xa)
    else:
        ya = kids[1].approx
        ey = ya.error_exp
        if kind is OpKind.ADD:
            v = ctx.add(xa.value, ya.value)
        elif kind is OpKind.SUB:
            v = ctx.sub(xa.value, ya.value)
        elif kind is OpKind.MUL:
            v = ctx.mul(xa.value, ya.value)
        elif kind is OpKind.DIV:
            v = _div_value(ctx, xa, ya, node)
        else:
            raise ValueError(f"cannot recompute {kind}")

    # Certified propagated bound (round-up arithmetic on nonnegative terms).
    if kind is OpKind.NEG:
        err = mpfr(0) if ex is None else _pow2(ex)
    elif kind in (OpKind.ADD, OpKind.SUB):
        err = mpfr(0)
        if ex is not None:
            err = _pow2(ex)
        if ey is not None:
            err = BOUND_UP.add(err, _pow2(ey))
    elif kind is OpKind.MUL:
        err = mpfr(0)
        if ey is not None:
            err = BOUND_UP.mul(BOUND_UP.abs(xa.value), _pow2(ey))
        if ex is not None:
            err = BOUND_UP.add(err, BOUND_UP.mul(BOUND_UP.abs(ya.value), _pow2(ex)))
            if ey is not None:
                err = BOUND_UP.add(err, _pow2(ex + ey))
    elif kind is OpKind.DIV:
        err = _div_bound(xa, ya, node)
    # sqrt already produced err above

    if ctx.inexact:
        if v == 0:
            raise EvaluationError("underflow during recomputation", node)
        # |v| < 2**get_exp(v), so one ulp is below 2**(get_exp - p).
        err = BOUND_UP.add(err, _pow2(gmpy2.get_exp(v) - p))

    error_exp = None if err == 0 else mpfr_ceil_exp(err)
    if error_exp is not None:
        # Store the accuracy that was requested, not the (usually tighter)
        # certified bound: a recomputation at accuracy q records accuracy q.
        # Skip decisions then depend only on requested accuracies, matching
        # the cost behavior of precision-driven number types.  The certified
        # bound stays the source of truth whenever it is the looser one.
        error_exp = max(error_exp, -q)
    elif v != 0:
        # Exact results keep only their significant bits, so later products
        # against them stay cheap (the bigfloat analogue of multiplying by
        # an integer).
        m, _ = v.as_mantissa_exp()
        m = int(m)
        length = abs(m).bit_length() - gmpy2.bit_scan1(abs(m))
        if length + 16 < p:
            v = mpfr(v, max(2, length))
    node.approx = Approximation(v, error_exp)
    node.evaluated = True

    if metrics._bootstrap_nesting:
        metrics.bootstrap_evals += 1
    else:
        metrics.recompute_total += 1
        key = id(node)
        metrics.recompute_per_node[key] = metrics.recompute_per_node.get(key, 0) + 1
    if kind in (OpKind.ADD, OpKind.SUB):
        mag = 0 if v == 0 else max(0, gmpy2.get_exp(v))
        metrics.add_cost_units += max(0.0, float(q + mag))
    elif kind is OpKind.MUL:
        mag = 0 if v == 0 else max(0, gmpy2.get_exp(v))
        metrics.mul_cost_units += max(0.0, float(q + mag)) ** cfg.mul_cost_exponent


def _sqrt_with_bound(ctx, xa: Approximation):
    m = xa.value
    if xa.error_exp is None:
        if m < 0:
            raise EvaluationError("sqrt of a negative exact value")
        return ctx.sqrt(m), mpfr(0)
    eps = _pow2(xa.error_exp)
    lb = BOUND_DOWN.sub(m, eps)
    if lb > 0:
        v = ctx.sqrt(m)
        err = BOUND_UP.div(eps, BOUND_DOWN.sqrt(lb))
        return v, err
    # Not separated from zero: the true value lies in [0, max(m,0)+eps] and
    # |sqrt(x) - sqrt(max(m,0))| <= sqrt(eps).
    v = ctx.sqrt(m) if m > 0 else mpfr(0)
    err = BOUND_UP.sqrt(eps)
    return v, err


def _div_value(ctx, xa: Approximation, ya: Approximation, node):
    if ya.value == 0:
        raise DivisorNotSeparatedError("division by zero approximation", node)
    return ctx.div(xa.value, ya.value)


def _div_bound(xa: Approximation, ya: Approximation, node):
    # |x/y - xv/yv| <= (eps_x*|yv| + |xv|*eps_y) / (lb_y * |yv|)
    if xa.error_exp is None and ya.error_exp is None:
        return mpfr(0)
    eps_x = mpfr(0) if xa.error_exp is None else _pow2(xa.error_exp)
    eps_y = mpfr(0) if ya.error_exp is None else _pow2(ya.error_exp)
    ay_hi = BOUND_UP.abs(ya.value)
    lb_y = BOUND_DOWN.sub(BOUND_DOWN.abs(ya.value), eps_y)
    if lb_y <= 0:
        raise DivisorNotSeparatedError("divisor approximation too coarse", node)
    num = BOUND_UP.add(BOUND_UP.mul(eps_x, ay_hi), BOUND_UP.mul(BOUND_UP.abs(xa.value), eps_y))
    den = BOUND_DOWN.mul(lb_y, BOUND_DOWN.abs(ya.value))
    return BOUND_UP.div(num, den)


# ---------------------------------------------------------------------------
# Evaluation strategies
# ---------------------------------------------------------------------------

def _run_recursive(root: DagNode, q: int, cfg: EvalConfig, metrics: EvalMetrics) -> None:
    """Alg.-style recursive descent, realized with an explicit stack.

    Magnitude bounds that the child-accuracy rules need are resolved on the
    same stack: a node whose children lack bounds is revisited after
    low-accuracy frames for those children complete (the divisor-separation
    accuracy doubles per revisit, so the loop is finite).
    """
    if root.approx is not None and root.approx.satisfies(q):
        return
    stack: list[tuple[DagNode, int, bool]] = [(root, q, False)]
    while stack:
        node, target, ready = stack.pop()
        if node.approx is not None and node.approx.satisfies(target):
            continue
        if ready:
            _recompute(node, target, cfg, metrics)
            continue
        if node.kind is OpKind.LEAF:
            continue  # leaves are exact by construction
        missing = _missing_magnitudes(node, cfg)
        if missing:
            stack.append((node, target, False))
            for child, acc in missing:
                stack.append((child, acc, False))
            continue
        reqs = required_child_accuracy(node, target, cfg, metrics)
        stack.append((node, target, True))
        for child, acc in zip(reversed(node.children), reversed(reqs)):
            stack.append((child, acc, False))


def evaluate_recursive(
    root: DagNode, q: int, cfg: EvalConfig | None = None, metrics: EvalMetrics | None = None
) -> Approximation:
    """Evaluate so that |true - value| <= 2**-q, recursing into stale children.

    Nodes with several parents may be recomputed once per parent request.
    """
    cfg = cfg or EvalConfig()
    metrics = metrics if metrics is not None else EvalMetrics()
    if q > cfg.max_precision:
        raise PrecisionOverflowError(f"q={q} exceeds max_precision", root)
    t0 = time.perf_counter()
    _run_recursive(root, q, cfg, metrics)
    metrics.eval_time += time.perf_counter() - t0
    return root.approx


def topological_order(root: DagNode, metrics: EvalMetrics | None = None) -> list[DagNode]:
    """All reachable inexact nodes, every node before its children.

    Deterministic: among ready nodes the smallest DFS preorder position
    (children visited left-to-right) is emitted first.
    """
    t0 = time.perf_counter()
    pre = iter_nodes(root)
    pos = {}
    inexact = []
    for i, node in enumerate(pre):
        if not node.is_exact:
            pos[id(node)] = i
            inexact.append(node)
    indeg = {id(n): 0 for n in inexact}
    for node in inexact:
        for child in node.children:
            if id(child) in indeg:
                indeg[id(child)] += 1
    heap = [(pos[id(n)], id(n), n) for n in inexact if indeg[id(n)] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, _, node = heapq.heappop(heap)
        order.append(node)
        for child in node.children:
            key = id(child)
            if key in indeg:
                indeg[key] -= 1
                if indeg[key] == 0:
                    heapq.heappush(heap, (pos[key], key, child))
    if len(order) != len(inexact):
        raise GraphCorruptionError("cycle detected while ordering the dag")
    if metrics is not None:
        metrics.topo_sort_time += time.perf_counter() - t0
    return order


def evaluate_topological(
    root: DagNode, q: int, cfg: EvalConfig | None = None, metrics: EvalMetrics | None = None
) -> Approximation:
    """Evaluate with aggregated accuracies: no node is recomputed twice.

    A forward pass over the topological order accumulates, per node, the
    maximum accuracy any parent requests; a backward pass recomputes exactly
    the nodes whose stored error exceeds their requested error.
    """
    cfg = cfg or EvalConfig()
    metrics = metrics if metrics is not None else EvalMetrics()
    if q > cfg.max_precision:
        raise PrecisionOverflowError(f"q={q} exceeds max_precision", root)
    if root.approx is not None and root.approx.satisfies(q):
        return root.approx
    t0 = time.perf_counter()
    top = topological_order(root, metrics)
    requested = {id(root): q}
    for node in top:
        # Bootstrapping during requirement computation may have turned an
        # ancestor subchain exact, in which case nothing requested this node.
        rq = requested.get(id(node))
        if rq is None or node.is_exact or node.kind is OpKind.LEAF:
            continue
        reqs = required_child_accuracy(node, rq, cfg, metrics)
        for child, acc in zip(node.children, reqs):
            if child.is_exact:
                continue
            key = id(child)
            cur = requested.get(key)
            if cur is None or acc > cur:
                requested[key] = acc
    for node in reversed(top):
        rq = requested.get(id(node))
        if rq is None:
            continue
        if node.approx is None or not node.approx.satisfies(rq):
            _recompute(node, rq, cfg, metrics)
    metrics.eval_time += time.perf_counter() - t0
    return root.approx


def evaluate(
    root: DagNode, q: int, cfg: EvalConfig | None = None, metrics: EvalMetrics | None = None
) -> Approximation:
    """Dispatch to the configured evaluation strategy."""
    cfg = cfg or EvalConfig()
    if cfg.strategy is Strategy.TOPOLOGICAL:
        return evaluate_topological(root, q, cfg, metrics)
    return evaluate_recursive(root, q, cfg, metrics)
