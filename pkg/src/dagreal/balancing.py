"""Restructuring of maximal operator trees into balanced form.

A maximal operator tree is a connected run of same-operation add or mul
nodes whose interior vertices have exactly one incoming reference and have
never been evaluated.  Its operands (children of the tree's leaves, plus any
boundary nodes) are collected left-to-right and recombined pairwise,
queue-style, which yields depth ceil(log2 m) over m operands.  Shared or
already-evaluated nodes are never dismantled; copying them instead could
blow the dag up exponentially.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .evaluation import BalanceMode, EvalConfig, EvalMetrics
from .nodes import DagNode, OpKind, make_leaf, make_node


@dataclass
class OperandList:
    """Operands of one dismantled operator tree, in original left-to-right
    order.  A node shared inside the tree appears once per incoming edge.
    tree_depth counts operator levels: a single binary node has depth 1.
    """

    operands: list[DagNode]
    tree_depth: int


def _ceil_log2(m: int) -> int:
    return (m - 1).bit_length()


def retrieve_operands(node: DagNode) -> OperandList:
    """Collect the maximal same-operation tree rooted at node.

    A visited child terminates the tree (and becomes an operand) when its
    operation differs, when it was balanced or evaluated before, or when it
    has more than one incoming reference.
    """
    if node.kind not in (OpKind.ADD, OpKind.MUL):
        raise ValueError(f"operator trees consist of add or mul nodes, not {node.kind.value}")
    if node.balanced:
        raise ValueError("node was already balanced")
    op = node.kind
    operands: list[DagNode] = []
    max_depth = 1
    stack = [(child, 1) for child in reversed(node.children)]
    while stack:
        child, d = stack.pop()
        if (
            child.kind is op
            and not child.balanced
            and not child.evaluated
            and child.ref_count == 1
        ):
            for grand in reversed(child.children):
                stack.append((grand, d + 1))
        else:
            operands.append(child)
            if d > max_depth:
                max_depth = d
    return OperandList(operands, max_depth)


def pad_to_power_of_two(operands: OperandList, op: OpKind) -> OperandList:
    """Append identity leaves (0 for add, 1 for mul) up to the next power of
    two, so that queue balancing preserves the operand order."""
    m = len(operands.operands)
    target = 1 << _ceil_log2(m)
    if target == m:
        return operands
    identity = 0 if op is OpKind.ADD else 1
    padded = list(operands.operands)
    padded.extend(make_leaf(identity) for _ in range(target - m))
    return OperandList(padded, operands.tree_depth)


def _release_edge(child: DagNode) -> None:
    # Drop one incoming edge; cascade through nodes that become unreachable
    # so that surviving operands end up with correct reference counts.
    stack = [child]
    while stack:
        node = stack.pop()
        node.ref_count -= 1
        if node.ref_count == 0:
            stack.extend(node.children)
            node.children = []


def balance_operation(operands: OperandList, op: OpKind, root: DagNode) -> None:
    """Rebuild the tree under root from the operand queue.

    Two operands are repeatedly dequeued and combined into a fresh node that
    is enqueued at the back, until two items remain; those become the root's
    children.  The dismantled interior nodes (single-reference by
    construction) are released.  The new tree has exactly m-1 operator nodes
    and operator depth ceil(log2 m).  Fresh interiors carry no filter
    interval; magnitude queries on them are answered by the structural
    log-bounds instead.
    """
    if len(operands.operands) < 2:
        raise ValueError("balancing needs at least two operands")
    if root.kind is not op:
        raise ValueError("root operation does not match the operand list")
    queue = deque(operands.operands)
    while len(queue) > 2:
        a = queue.popleft()
        b = queue.popleft()
        queue.append(make_node(op, [a, b]))
    left, right = queue
    old_children = root.children
    root.children = [left, right]
    left.ref_count += 1
    right.ref_count += 1
    for child in old_children:
        _release_edge(child)


def balance_dag(root: DagNode, cfg: EvalConfig, metrics: EvalMetrics | None = None) -> None:
    """Balance every eligible operator tree reachable from root, once.

    Runs right before the first bigfloat evaluation.  At each unbalanced
    add/mul node matching the configured mode the operand list is retrieved;
    the tree is rebuilt when its depth exceeds
    balance_threshold_factor * ceil(log2 m).  The walk then recurses on the
    operands; other nodes recurse on their children.  Every visited node is
    marked balanced, so a second invocation changes nothing.
    """
    if cfg.balance_mode is BalanceMode.NONE:
        return
    if metrics is None:
        metrics = EvalMetrics()
    t0 = time.perf_counter()
    if cfg.balance_mode is BalanceMode.ADD:
        wanted = (OpKind.ADD,)
    elif cfg.balance_mode is BalanceMode.MUL:
        wanted = (OpKind.MUL,)
    else:
        wanted = (OpKind.ADD, OpKind.MUL)
    depth_before = 0
    depth_after = 0
    stack = [root]
    while stack:
        node = stack.pop()
        if node.balanced:
            continue
        if node.kind in wanted and not node.evaluated:
            ops = retrieve_operands(node)
            m = len(ops.operands)
            target = _ceil_log2(m)
            depth_before = max(depth_before, ops.tree_depth)
            if ops.tree_depth > cfg.balance_threshold_factor * target:
                use = pad_to_power_of_two(ops, node.kind) if cfg.order_preserving else ops
                balance_operation(use, node.kind, node)
                metrics.trees_balanced += 1
                depth_after = max(depth_after, _ceil_log2(len(use.operands)))
            else:
                depth_after = max(depth_after, ops.tree_depth)
            node.balanced = True
            stack.extend(ops.operands)
        else:
            node.balanced = True
            stack.extend(node.children)
    metrics.depth_before = max(metrics.depth_before, depth_before)
    metrics.depth_after = max(metrics.depth_after, depth_after)
    metrics.balance_time += time.perf_counter() - t0
