"""Command-line entry point.

Subcommands: ``run --config <path>``, ``aggregate --in <dir> --out <csv>``,
``theory --figure {slope|usize} --out <csv>`` and ``bench list``.  Exit
code 0 on success; failures print a machine-readable JSON object on
stderr and exit non-zero.
"""

import argparse
import json
import sys

from . import benchmarks, harness
from .algorithms import optimizer_names


def _build_parser():
    parser = argparse.ArgumentParser(prog="tvbo")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True, help="JSON config path")

    p_agg = sub.add_parser("aggregate", help="normalize regrets across runs")
    p_agg.add_argument("--in", dest="input_dir", required=True,
                       help="directory containing *_summary.json files")
    p_agg.add_argument("--out", required=True, help="output CSV path")

    p_theory = sub.add_parser("theory", help="emit bound-calculator curves")
    p_theory.add_argument("--figure", choices=["slope", "usize"],
                          required=True)
    p_theory.add_argument("--out", required=True, help="output CSV path")

    p_bench = sub.add_parser("bench", help="benchmark utilities")
    bench_sub = p_bench.add_subparsers(dest="bench_command", required=True)
    bench_sub.add_parser("list", help="list available benchmarks")

    return parser


def _cmd_run(args):
    config = harness.load_config(args.config)
    traces = harness.run(config)
    for trace in traces:
        print(f"{trace.benchmark} {trace.algorithm} seed={trace.seed}: "
              f"{len(trace.rows)} iterations, "
              f"final average regret {trace.final_average_regret():.6g}")
    print(f"wrote traces and summary to {config.output_dir}")


def _cmd_aggregate(args):
    summaries = harness.read_summaries(args.input_dir)
    normalized, averages = harness.aggregate(summaries)
    harness.write_aggregate_csv(normalized, averages, args.out)
    for algo in sorted(averages):
        print(f"{algo}: {averages[algo]:.4f}")
    print(f"wrote {args.out}")


def _cmd_theory(args):
    harness.emit_theory_curves(args.figure, args.out)
    print(f"wrote {args.out}")


def _cmd_bench(args):
    if args.bench_command == "list":
        for name in benchmarks.benchmark_names():
            spec = benchmarks.get_benchmark(name)
            print(f"{name}: d={spec.dim}, noise_variance={spec.noise_variance}, "
                  f"cost={spec.cost}s (algorithms: {', '.join(optimizer_names())})")


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "aggregate": _cmd_aggregate,
        "theory": _cmd_theory,
        "bench": _cmd_bench,
    }
    try:
        handlers[args.command](args)
    except Exception as exc:  # fail with machine-readable error JSON
        print(json.dumps({"error": {"type": type(exc).__name__,
                                    "message": str(exc)}}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
