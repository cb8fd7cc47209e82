"""Expression dag core: node type, construction, structure queries, DOT export.

An expression dag is a rooted ordered directed acyclic graph.  Leaves hold
exact binary floating-point numbers; interior nodes hold one of the
operations neg, sqrt (unary) or add, sub, mul, div (binary).  Children may
be shared between parents; ``ref_count`` tracks incoming edges plus live
external handles, which is what the balancer consults to decide whether a
node may be dismantled.
"""

from __future__ import annotations

import math
from enum import Enum

from gmpy2 import mpfr

from .errors import GraphCorruptionError
from .rounding import iv_exact


class OpKind(Enum):
    LEAF = "leaf"
    NEG = "neg"
    SQRT = "sqrt"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"

    @property
    def arity(self) -> int:
        if self is OpKind.LEAF:
            return 0
        if self in (OpKind.NEG, OpKind.SQRT):
            return 1
        return 2


class Approximation:
    """An arbitrary-precision value with a certified absolute error bound.

    ``error_exp`` is an integer such that |true - value| <= 2**error_exp,
    or ``None`` when the value is exact.  "Accurate up to q fractional
    digits" is equivalent to ``error_exp <= -q``.
    """

    __slots__ = ("value", "error_exp")

    def __init__(self, value, error_exp: int | None):
        self.value = value
        self.error_exp = error_exp

    @property
    def is_exact(self) -> bool:
        return self.error_exp is None

    def satisfies(self, q: int) -> bool:
        """True when the bound certifies q fractional digits."""
        return self.error_exp is None or self.error_exp <= -q

    def __repr__(self) -> str:
        tag = "exact" if self.is_exact else f"err<=2^{self.error_exp}"
        return f"Approximation({self.value!r}, {tag})"


#: sentinel for magnitude hints that have not been derived yet
UNSET = object()


class DagNode:
    __slots__ = (
        "kind",
        "children",
        "ref_count",
        "leaf_value",
        "approx",
        "balanced",
        "evaluated",
        "interval",
        "mag_ub_hint",
        "mag_lb_hint",
    )

    def __init__(self, kind: OpKind, children: list["DagNode"], interval=None):
        self.kind = kind
        self.children = children
        self.ref_count = 0
        self.leaf_value = None
        self.approx: Approximation | None = None
        self.balanced = False
        self.evaluated = False
        self.interval = interval  # (lo, hi) hardware doubles, or None
        # Structural magnitude bounds (integer exponents or None), derived
        # lazily by the evaluator; values never change, so they stay valid.
        self.mag_ub_hint = UNSET
        self.mag_lb_hint = UNSET

    @property
    def is_exact(self) -> bool:
        return self.approx is not None and self.approx.error_exp is None

    def __del__(self):
        # A reclaimed node takes its outgoing edges with it.
        try:
            for child in self.children:
                child.ref_count -= 1
        except (AttributeError, TypeError):
            pass

    def __repr__(self) -> str:
        if self.kind is OpKind.LEAF:
            return f"DagNode(leaf {self.leaf_value})"
        return f"DagNode({self.kind.value}, refs={self.ref_count})"


def make_leaf(value) -> DagNode:
    """Create a leaf holding an exact binary floating-point literal.

    Accepts ints, floats, and mpfr values that are exactly representable;
    non-finite input is rejected.
    """
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"leaf value must be finite, got {value!r}")
        exact = mpfr(value)
    elif isinstance(value, int):
        exact = mpfr(value, max(2, value.bit_length() + 1))
        if exact != value:
            raise ValueError(f"integer {value} not exactly representable")
    elif isinstance(value, mpfr):
        import gmpy2

        if not gmpy2.is_finite(value):
            raise ValueError(f"leaf value must be finite, got {value!r}")
        exact = value
    else:
        raise TypeError(f"unsupported leaf type {type(value).__name__}")
    node = DagNode(OpKind.LEAF, [], interval=iv_exact(exact))
    node.leaf_value = exact
    node.approx = Approximation(exact, None)
    node.evaluated = True
    return node


def make_node(kind: OpKind, children: list[DagNode], interval=None) -> DagNode:
    """Create a fresh operator node over existing dags.

    Children may repeat (a parent with both edges to one child contributes
    two references).  Each child's ref_count is incremented per edge.
    """
    if kind is OpKind.LEAF:
        raise ValueError("use make_leaf for leaves")
    if len(children) != kind.arity:
        raise ValueError(f"{kind.value} takes {kind.arity} children, got {len(children)}")
    node = DagNode(kind, list(children), interval=interval)
    for child in children:
        child.ref_count += 1
    return node


def iter_nodes(root: DagNode) -> list[DagNode]:
    """All distinct reachable nodes in DFS preorder, children left-to-right."""
    seen = set()
    order = []
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        order.append(node)
        stack.extend(reversed(node.children))
    return order


def depth(root: DagNode) -> int:
    """Edge count of the longest root-to-node path; a leaf has depth 0.

    Memoized over shared subdags so every node is visited once.
    """
    memo: dict[int, int] = {}
    stack = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if id(node) in memo:
            continue
        if processed or not node.children:
            memo[id(node)] = 1 + max(
                (memo[id(c)] for c in node.children), default=-1
            )
        else:
            stack.append((node, True))
            for child in node.children:
                if id(child) not in memo:
                    stack.append((child, False))
    return memo[id(root)]


def node_count(root: DagNode) -> int:
    """Number of distinct nodes reachable from root (shared nodes count once)."""
    return len(iter_nodes(root))


def is_acyclic(root: DagNode) -> bool:
    """Check reachable-subgraph acyclicity via iterative three-color DFS."""
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[int, int] = {}
    stack = [(root, False)]
    while stack:
        node, leaving = stack.pop()
        if leaving:
            color[id(node)] = BLACK
            continue
        state = color.get(id(node), WHITE)
        if state == GREY:
            return False
        if state == BLACK:
            continue
        color[id(node)] = GREY
        stack.append((node, True))
        for child in node.children:
            c = color.get(id(child), WHITE)
            if c == GREY:
                return False
            if c == WHITE:
                stack.append((child, False))
    return True


def check_acyclic(root: DagNode) -> None:
    if not is_acyclic(root):
        raise GraphCorruptionError("expression dag contains a cycle")


def export_dot(root: DagNode) -> str:
    """Deterministic DOT text: stable ids by DFS preorder, kind and flags shown."""
    order = iter_nodes(root)
    ids = {id(node): i for i, node in enumerate(order)}
    lines = ["digraph expression {"]
    for i, node in enumerate(order):
        if node.kind is OpKind.LEAF:
            label = f"leaf {node.leaf_value}"
        else:
            label = node.kind.value
        flags = ("b" if node.balanced else "") + ("e" if node.evaluated else "")
        if flags:
            label += f" [{flags}]"
        lines.append(f'  n{i} [label="{label}"];')
    for i, node in enumerate(order):
        for child in node.children:
            lines.append(f"  n{i} -> n{ids[id(child)]};")
    lines.append("}")
    return "\n".join(lines)
