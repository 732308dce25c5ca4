"""Command-line entry point: ``pvqc run | plot | selftest``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import experiment, plotting, selftest
from .sweep import ConfigError, parse_config

OUT_ENV = "QML_OUT_DIR"
DEFAULT_OUT = "results"

log = logging.getLogger("pvqc")


def resolve_out_dir(flag: str | None, configs) -> Path:
    """``--out`` beats the config's ``output_dir``, then ``$QML_OUT_DIR``, then ``./results``."""
    if flag:
        return Path(flag)
    from_config = {c.output_dir for c in configs if c.output_dir}
    if len(from_config) == 1:
        return Path(from_config.pop())
    env = os.environ.get(OUT_ENV)
    return Path(env) if env else Path(DEFAULT_OUT)


def describe(cfg: experiment.ExperimentConfig) -> str:
    return (
        f"{cfg.config_id}: qubits={cfg.n_qubits} depth={cfg.depth} epochs={cfg.epochs} "
        f"batch={cfg.batch_size} seeds={','.join(map(str, cfg.seeds))}"
    )


def summary_table(results) -> str:
    tasks = []
    variants = []
    cells = {}
    for r in results:
        task, variant = r.config.task_id, r.config.variant
        if task not in tasks:
            tasks.append(task)
        if variant not in variants:
            variants.append(variant)
        mean, std = r.final_acc
        cells[variant, task] = f"{mean:.3f} +- {std:.3f}"
    width = max([len("variant")] + [len(v) for v in variants])
    cols = [max(len(t), 15) for t in tasks]
    lines = ["  ".join(["variant".ljust(width)] + [t.ljust(w) for t, w in zip(tasks, cols)])]
    lines.append("  ".join(["-" * width] + ["-" * w for w in cols]))
    for v in variants:
        row = [v.ljust(width)] + [cells.get((v, t), "-").ljust(w) for t, w in zip(tasks, cols)]
        lines.append("  ".join(row).rstrip())
    return "\n".join(lines)


def cmd_run(args) -> int:
    try:
        spec = parse_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.dry_run:
        for cfg in spec.configs:
            print(describe(cfg))
        print(f"{len(spec.configs)} configurations")
        return 0
    if not spec.configs:
        print("empty sweep; nothing to run")
        return 0
    out_dir = resolve_out_dir(args.out, spec.configs)
    results = []
    # one config at a time so a failure leaves earlier files in place
    for cfg in spec.configs:
        log.info("running %s", describe(cfg))
        try:
            results.extend(experiment.run_many([cfg], workers=args.parallel, out_dir=out_dir))
        except Exception as exc:  # noqa: BLE001 - report and keep partial results
            print(f"error: {cfg.config_id} failed: {exc}", file=sys.stderr)
            if results:
                print(summary_table(results))
            return 1
    print(summary_table(results))
    print(f"results written to {out_dir}")
    return 0


def cmd_plot(args) -> int:
    try:
        out = plotting.plot_summaries(args.summary, args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def cmd_selftest(args) -> int:
    failed = 0
    for name, passed, detail in selftest.run_all(seed=args.seed):
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        failed += not passed
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pvqc", description="Programmable-observable VQC experiments")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment sweep from a config file")
    run.add_argument("--config", required=True, help="sweep config (INI grammar, see README)")
    run.add_argument("--out", help=f"output directory (default: config output_dir, ${OUT_ENV}, ./{DEFAULT_OUT})")
    run.add_argument("--parallel", type=int, default=1, help="worker processes (default 1)")
    run.add_argument("--dry-run", action="store_true", help="print the expanded configs and exit")
    run.set_defaults(func=cmd_run)

    plot = sub.add_parser("plot", help="draw learning curves from summary CSVs")
    plot.add_argument("--summary", required=True, nargs="+", help="one or more summary_<id>.csv files")
    plot.add_argument("--out", required=True, help="SVG path to write")
    plot.set_defaults(func=cmd_plot)

    st = sub.add_parser("selftest", help="run the gradient and invariant checks")
    st.add_argument("--seed", type=int, default=2024)
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "parallel", 1) < 1:
        print("error: --parallel must be >= 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
