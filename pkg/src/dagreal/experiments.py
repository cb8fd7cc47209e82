"""Benchmark experiments over the balancing/evaluation strategy matrix.

Each experiment builds its expression fresh per run, requests an absolute
accuracy of 2**-q, checks the result against an independent closed-form
oracle, and records work counters, timers and dag shape into a RunRecord.
Rows serialize to CSV with a fixed header.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field
from enum import Enum

from . import oracle
from .evaluation import BalanceMode, EvalConfig, EvalMetrics, Strategy
from .nodes import node_count
from .real import ExactReal


class Experiment(Enum):
    SUM_OF_SQRTS = "sum-of-sqrts"
    BIN_COEFF = "bin-coeff"
    GEOMETRIC_SUM = "geometric-sum"
    TELESCOPING_PRODUCT = "telescoping"
    TELESCOPING_PRODUCT_REVERSE = "telescoping-reverse"


@dataclass
class ExperimentConfig:
    experiment: Experiment
    n: int
    q: int
    start_index: int = 1
    repeat: int = 25
    eval_cfg: EvalConfig = field(default_factory=EvalConfig)
    verify: bool = True

    def __post_init__(self):
        if self.n < 1 or self.q < 1 or self.start_index < 1:
            raise ValueError("need n >= 1, q >= 1, start_index >= 1")
        if self.repeat < 1:
            raise ValueError("repeat must be >= 1")


@dataclass
class RunRecord:
    experiment: str
    n: int
    q: int
    start_index: int
    balance: str
    eval_strategy: str
    order_preserving: bool
    run_index: int
    wall_time: float
    metrics: EvalMetrics
    node_count: int
    verified: bool | None  # None when verification was skipped
    value: object = None
    dag_root: object = None

    @property
    def passed(self) -> bool:
        return self.verified is not False


CSV_HEADER = (
    "experiment,n,q,start_index,balance,eval,order_preserving,run_index,"
    "wall_time_s,add_cost_units,mul_cost_units,recompute_total,"
    "balance_time_s,topo_sort_time_s,depth_before,depth_after,node_count,verified"
)


# -- expression builders ------------------------------------------------------

def build_sum_of_sqrts(n: int) -> ExactReal:
    total = ExactReal(0)
    for i in range(1, n + 1):
        total = total + ExactReal(i).sqrt()
    return total


def build_bin_coeff(n: int) -> ExactReal:
    b = ExactReal(13).sqrt()
    num = ExactReal(1)
    denom = ExactReal(1)
    for i in range(n):
        num = num * (b - ExactReal(i))
        denom = denom * ExactReal(i + 1)
    return num / denom


def build_geometric_sum(n: int) -> ExactReal:
    r = (ExactReal(13) / ExactReal(64)).sqrt()
    ri = ExactReal(1)
    total = ri
    for _ in range(n):
        ri = ri * r
        total = total + ri
    return total


def build_telescoping_product(n: int, start_index: int = 1, reverse: bool = False) -> ExactReal:
    prod = ExactReal(1)
    indices = range(n - 1, start_index - 1, -1) if reverse else range(start_index, n)
    for i in indices:
        prod = prod * (ExactReal(i + 1) / ExactReal(i))
    return prod


def _build(cfg: ExperimentConfig) -> ExactReal:
    exp = cfg.experiment
    if exp is Experiment.SUM_OF_SQRTS:
        return build_sum_of_sqrts(cfg.n)
    if exp is Experiment.BIN_COEFF:
        return build_bin_coeff(cfg.n)
    if exp is Experiment.GEOMETRIC_SUM:
        return build_geometric_sum(cfg.n)
    reverse = exp is Experiment.TELESCOPING_PRODUCT_REVERSE
    return build_telescoping_product(cfg.n, cfg.start_index, reverse)


def _oracle_value(cfg: ExperimentConfig):
    exp, n, q = cfg.experiment, cfg.n, cfg.q
    if exp is Experiment.SUM_OF_SQRTS:
        return oracle.sum_of_sqrts_value(n, q)
    if exp is Experiment.BIN_COEFF:
        return oracle.bin_coeff_value(n, q)
    if exp is Experiment.GEOMETRIC_SUM:
        return oracle.geometric_sum_value(n, q)
    return oracle.telescoping_value(n, cfg.start_index, q)


# -- running ------------------------------------------------------------------

def _single_run(cfg: ExperimentConfig, run_index: int, reference, keep_dag: bool) -> RunRecord:
    root = _build(cfg)
    metrics = EvalMetrics()
    t0 = time.perf_counter()
    approx = root.guarantee_absolute_error_two_to(-cfg.q, cfg.eval_cfg, metrics)
    wall = time.perf_counter() - t0
    verified = None
    if reference is not None:
        verified = oracle.within_tolerance(approx, reference, cfg.q)
    return RunRecord(
        experiment=cfg.experiment.value,
        n=cfg.n,
        q=cfg.q,
        start_index=cfg.start_index,
        balance=cfg.eval_cfg.balance_mode.value,
        eval_strategy=cfg.eval_cfg.strategy.value,
        order_preserving=cfg.eval_cfg.order_preserving,
        run_index=run_index,
        wall_time=wall,
        metrics=metrics,
        node_count=node_count(root.node),
        verified=verified,
        value=approx,
        dag_root=root if keep_dag else None,
    )


def run_experiment(cfg: ExperimentConfig, keep_dag: bool = False) -> list[RunRecord]:
    """Run one configuration ``repeat`` times (plus a discarded warmup when
    repeat > 1) and return one record per counted run."""
    reference = _oracle_value(cfg) if cfg.verify else None
    if cfg.repeat > 1:
        _single_run(cfg, -1, None, False)  # warmup, discarded
    records = []
    for run_index in range(cfg.repeat):
        keep = keep_dag and run_index == cfg.repeat - 1
        records.append(_single_run(cfg, run_index, reference, keep))
    return records


def sum_of_sqrts(n: int, q: int, cfg: EvalConfig | None = None, **kwargs) -> RunRecord:
    ec = ExperimentConfig(Experiment.SUM_OF_SQRTS, n, q, repeat=1, eval_cfg=cfg or EvalConfig(), **kwargs)
    return run_experiment(ec)[0]


def bin_coeff(n: int, q: int, cfg: EvalConfig | None = None, **kwargs) -> RunRecord:
    ec = ExperimentConfig(Experiment.BIN_COEFF, n, q, repeat=1, eval_cfg=cfg or EvalConfig(), **kwargs)
    return run_experiment(ec)[0]


def geometric_sum(n: int, q: int, cfg: EvalConfig | None = None, **kwargs) -> RunRecord:
    ec = ExperimentConfig(Experiment.GEOMETRIC_SUM, n, q, repeat=1, eval_cfg=cfg or EvalConfig(), **kwargs)
    return run_experiment(ec)[0]


def telescoping_product(
    n: int,
    q: int,
    cfg: EvalConfig | None = None,
    start_index: int = 1,
    reverse: bool = False,
    **kwargs,
) -> RunRecord:
    exp = Experiment.TELESCOPING_PRODUCT_REVERSE if reverse else Experiment.TELESCOPING_PRODUCT
    ec = ExperimentConfig(
        exp, n, q, start_index=start_index, repeat=1, eval_cfg=cfg or EvalConfig(), **kwargs
    )
    return run_experiment(ec)[0]


def make_grid(
    experiments,
    n: int,
    q: int,
    balance_modes=tuple(BalanceMode),
    strategies=tuple(Strategy),
    order_preserving_options=(False,),
    repeat: int = 1,
    start_index: int = 1,
    guard_bits: int = 2,
) -> list[ExperimentConfig]:
    """Cartesian strategy grid for run_matrix."""
    grid = []
    if isinstance(experiments, Experiment):
        experiments = [experiments]
    for exp in experiments:
        for mode in balance_modes:
            for strategy in strategies:
                for op in order_preserving_options:
                    cfg = EvalConfig(
                        guard_bits=guard_bits,
                        strategy=strategy,
                        balance_mode=mode,
                        order_preserving=op,
                    )
                    grid.append(
                        ExperimentConfig(
                            exp, n, q, start_index=start_index, repeat=repeat, eval_cfg=cfg
                        )
                    )
    return grid


def run_matrix(grid, csv_path=None) -> list[RunRecord]:
    """Run every configuration in the grid; optionally write the CSV."""
    records = []
    for cfg in grid:
        records.extend(run_experiment(cfg))
    if csv_path is not None:
        write_csv(records, csv_path)
    return records


def _csv_row(r: RunRecord) -> str:
    m = r.metrics
    fields = [
        r.experiment,
        str(r.n),
        str(r.q),
        str(r.start_index),
        r.balance,
        r.eval_strategy,
        "true" if r.order_preserving else "false",
        str(r.run_index),
        repr(r.wall_time),
        repr(m.add_cost_units),
        repr(m.mul_cost_units),
        str(m.recompute_total),
        repr(m.balance_time),
        repr(m.topo_sort_time),
        str(m.depth_before),
        str(m.depth_after),
        str(r.node_count),
        "skipped" if r.verified is None else ("true" if r.verified else "false"),
    ]
    return ",".join(fields)


def write_csv(records, path_or_file) -> None:
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w") as fh:
            _write_csv_stream(records, fh)
    else:
        _write_csv_stream(records, path_or_file)


def _write_csv_stream(records, fh: io.TextIOBase) -> None:
    fh.write(CSV_HEADER + "\n")
    for record in records:
        fh.write(_csv_row(record) + "\n")
