"""Command line driver: ``bench run`` executes one experiment configuration.

Exit codes: 0 on success, 1 when any oracle check fails, 2 on configuration
errors.
"""

from __future__ import annotations

import argparse
import sys

from .evaluation import BalanceMode, EvalConfig, Strategy
from .experiments import (
    CSV_HEADER,
    Experiment,
    ExperimentConfig,
    _csv_row,
    run_experiment,
    write_csv,
)
from .nodes import export_dot

_BALANCE = {m.value: m for m in BalanceMode}
_EVAL = {s.value: s for s in Strategy}
_EXPERIMENTS = {e.value: e for e in Experiment}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment configuration")
    run.add_argument("--experiment", required=True, choices=sorted(_EXPERIMENTS))
    run.add_argument("--n", type=int, required=True)
    run.add_argument("--q", type=int, required=True)
    run.add_argument("--start-index", type=int, default=1)
    run.add_argument("--balance", choices=sorted(_BALANCE), default="def")
    run.add_argument("--eval", dest="eval_strategy", choices=sorted(_EVAL), default="recursive")
    run.add_argument("--order-preserving", action="store_true")
    run.add_argument("--repeat", type=int, default=25)
    run.add_argument("--csv", metavar="PATH")
    run.add_argument(
        "--verify",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="check results against the closed-form oracle (default: on)",
    )
    run.add_argument("--dot", metavar="PATH", help="write the final dag as DOT text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    eval_cfg = EvalConfig(
        strategy=_EVAL[args.eval_strategy],
        balance_mode=_BALANCE[args.balance],
        order_preserving=args.order_preserving,
    )
    try:
        cfg = ExperimentConfig(
            experiment=_EXPERIMENTS[args.experiment],
            n=args.n,
            q=args.q,
            start_index=args.start_index,
            repeat=args.repeat,
            eval_cfg=eval_cfg,
            verify=args.verify,
        )
    except ValueError as exc:
        parser.error(str(exc))  # exits with code 2
    records = run_experiment(cfg, keep_dag=args.dot is not None)
    if args.csv:
        write_csv(records, args.csv)
    else:
        print(CSV_HEADER)
        for record in records:
            print(_csv_row(record))
    if args.dot:
        final = records[-1]
        with open(args.dot, "w") as fh:
            fh.write(export_dot(final.dag_root.node) + "\n")
    if any(record.verified is False for record in records):
        print("oracle verification FAILED", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
