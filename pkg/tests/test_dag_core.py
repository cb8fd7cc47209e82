import math

import pytest
from gmpy2 import mpfr

from dagreal import (
    ExactReal,
    OpKind,
    depth,
    export_dot,
    is_acyclic,
    iter_nodes,
    make_leaf,
    make_node,
    node_count,
)


def build_a16():
    """Repeated-squaring dag for a**16: four mul nodes over one shared leaf."""
    a = make_leaf(2)
    x = a
    for _ in range(4):
        x = make_node(OpKind.MUL, [x, x])
    return x, a


def test_make_leaf_exact():
    leaf = make_leaf(1)
    assert leaf.kind is OpKind.LEAF
    assert leaf.evaluated
    assert leaf.approx.is_exact
    assert leaf.approx.value == 1
    assert depth(leaf) == 0

    half = make_leaf(0.5)
    assert half.approx.is_exact
    assert half.approx.value == 0.5
    assert depth(half) == 0


def test_make_leaf_rejects_nonfinite():
    with pytest.raises(ValueError):
        make_leaf(float("inf"))
    with pytest.raises(ValueError):
        make_leaf(float("nan"))
    with pytest.raises(ValueError):
        make_leaf(mpfr("inf"))
    with pytest.raises(TypeError):
        make_leaf("1.5")


def test_make_leaf_big_int_exact():
    big = (1 << 200) + 1
    leaf = make_leaf(big)
    assert leaf.approx.value == big


def test_sqrt_of_leaf_depth_one():
    b = make_node(OpKind.SQRT, [make_leaf(13)])
    assert depth(b) == 1


def test_make_node_self_shared_child():
    x = make_leaf(3)
    before = x.ref_count
    node = make_node(OpKind.ADD, [x, x])
    assert x.ref_count == before + 2
    assert node.children == [x, x]


def test_make_node_ordered_children():
    num, denom = make_leaf(1), make_leaf(2)
    node = make_node(OpKind.DIV, [num, denom])
    assert node.children[0] is num
    assert node.children[1] is denom


def test_make_node_arity_mismatch():
    with pytest.raises(ValueError):
        make_node(OpKind.ADD, [make_leaf(1)])
    with pytest.raises(ValueError):
        make_node(OpKind.SQRT, [make_leaf(1), make_leaf(2)])
    with pytest.raises(ValueError):
        make_node(OpKind.LEAF, [])


def test_a16_sharing_counts():
    root, a = build_a16()
    assert node_count(root) == 5
    # The spec sketch of this dag ("4 mul levels plus the leaf edge") counts
    # nodes on the path; by the edge-count definition (leaf depth 0, chain of
    # n operators depth n) the longest path has 4 edges.
    assert depth(root) == 4
    assert a.ref_count == 2  # both edges of the innermost squaring


def test_full_copy_expansion_would_be_16_nodes():
    # The forbidden alternative: resolve every shared mul by copying, keeping
    # the leaf shared; 8+4+2+1 muls plus one leaf.
    a = make_leaf(2)
    level = [make_node(OpKind.MUL, [a, a]) for _ in range(8)]
    while len(level) > 1:
        level = [
            make_node(OpKind.MUL, [level[i], level[i + 1]])
            for i in range(0, len(level), 2)
        ]
    assert node_count(level[0]) == 16


def test_depth_left_deep_chain():
    # x1 + (x2 + (x3 + x4)) has three operator levels
    x = [make_leaf(i) for i in range(1, 5)]
    inner = make_node(OpKind.ADD, [x[2], x[3]])
    mid = make_node(OpKind.ADD, [x[1], inner])
    root = make_node(OpKind.ADD, [x[0], mid])
    assert depth(root) == 3


def test_chain_depth_and_count_law():
    # n binary operators over n+1 distinct leaves: depth n, node count 2n+1
    for n in (1, 4, 17, 64):
        acc = make_leaf(0)
        for i in range(n):
            acc = make_node(OpKind.ADD, [acc, make_leaf(i)])
        assert depth(acc) == n
        assert node_count(acc) == 2 * n + 1


def test_node_count_leaf():
    assert node_count(make_leaf(7)) == 1


def test_traversal_order_independence():
    root, _ = build_a16()
    assert depth(root) == depth(root)
    assert node_count(root) == node_count(root)
    assert is_acyclic(root)


def test_export_dot_single_leaf():
    text = export_dot(make_leaf(1))
    assert text.count("label=") == 1
    assert "->" not in text


def test_export_dot_add():
    root = make_node(OpKind.ADD, [make_leaf(1), make_leaf(2)])
    text = export_dot(root)
    assert text.count("label=") == 3
    assert text.count("->") == 2


def test_export_dot_a16_shared():
    root, _ = build_a16()
    text = export_dot(root)
    assert text.count("label=") == 5
    assert text.count("->") == 8
    # deterministic across calls
    assert text == export_dot(root)


def test_iter_nodes_preorder():
    left = make_leaf(1)
    right = make_leaf(2)
    root = make_node(OpKind.SUB, [left, right])
    assert iter_nodes(root) == [root, left, right]


def test_handle_refcounts_settle():
    # Intermediate handles die as the loop rebinds, leaving chain interiors
    # with a single incoming reference each (CPython prompt finalization).
    total = ExactReal(0)
    for i in range(1, 6):
        total = total + ExactReal(i)
    interior = total.node.children[0]
    assert interior.ref_count == 1
    assert total.node.ref_count == 1  # only the live handle


def test_refcount_edges_plus_handles():
    x = ExactReal(3)
    y = x + x
    # leaf: two edges from the add node plus the live handle x
    assert x.node.ref_count == 3
    del y
    assert x.node.ref_count == 1
