"""dagreal: exact-decision reals on expression dags with operator-tree
balancing and accuracy-driven bigfloat evaluation."""

from .balancing import OperandList, balance_dag, balance_operation, pad_to_power_of_two, retrieve_operands
from .costmodel import CostParams, predict_add_cost, predict_mul_cost
from .errors import (
    DagrealError,
    DivisorNotSeparatedError,
    DomainError,
    EvaluationError,
    GraphCorruptionError,
    PrecisionOverflowError,
)
from .evaluation import (
    BalanceMode,
    EvalConfig,
    EvalMetrics,
    Strategy,
    evaluate,
    evaluate_recursive,
    evaluate_topological,
    required_child_accuracy,
    topological_order,
)
from .nodes import (
    Approximation,
    DagNode,
    OpKind,
    check_acyclic,
    depth,
    export_dot,
    is_acyclic,
    iter_nodes,
    make_leaf,
    make_node,
    node_count,
)
from .oracle import naive_eval
from .real import ExactReal, arith, sqrt

__version__ = "0.1.0"

__all__ = [
    "Approximation",
    "BalanceMode",
    "CostParams",
    "DagNode",
    "DagrealError",
    "DivisorNotSeparatedError",
    "DomainError",
    "EvalConfig",
    "EvalMetrics",
    "EvaluationError",
    "ExactReal",
    "GraphCorruptionError",
    "OpKind",
    "OperandList",
    "PrecisionOverflowError",
    "Strategy",
    "arith",
    "balance_dag",
    "balance_operation",
    "check_acyclic",
    "depth",
    "evaluate",
    "evaluate_recursive",
    "evaluate_topological",
    "export_dot",
    "is_acyclic",
    "iter_nodes",
    "make_leaf",
    "make_node",
    "naive_eval",
    "node_count",
    "pad_to_power_of_two",
    "predict_add_cost",
    "predict_mul_cost",
    "required_child_accuracy",
    "retrieve_operands",
    "sqrt",
    "topological_order",
]
