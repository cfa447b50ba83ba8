"""Command line interface.

Subcommands mirror the experiment pipeline:

    train            train a model fault-free and checkpoint it
    inject           generate a seeded fault map
    map              build a mapping plan for a strategy against a fault map
    eval             accuracy + cost of one (strategy, rate, seed) cell
    sweep            full (strategy, rate, seed) cross product with reports
    analyze-neurons  accuracy impact of each faulty neuron operation

Exit codes: 0 success, 2 config error, 3 data error, 4 unmappable plan.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from snnfault.artifacts import (
    dump_fault_map,
    load_fault_map,
    load_model,
    save_fault_map,
    save_model,
    save_plan,
)
from snnfault.config import ExperimentConfig
from snnfault.errors import ConfigError, DataError, UnmappableError
from snnfault.faults import CrossbarGeometry, generate_fault_map
from snnfault.harness import (
    ANALYZE_COLUMNS,
    SWEEP_COLUMNS,
    analyze_rows,
    encode_eval_set,
    eval_row,
    evaluate_accuracy,
    fmt,
    load_split,
    rows_to_csv,
    run_sweep,
    train_model,
)
from snnfault.mapping import Strategy, build_plan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_UNMAPPABLE = 4


def _load_config(args) -> ExperimentConfig:
    if args.config:
        return ExperimentConfig.load(args.config)
    return ExperimentConfig()


def _cmd_train(args) -> int:
    config = _load_config(args)
    if args.seed is not None:
        config.train_seed = args.seed
    train_set, test_set = load_split(config)
    model = train_model(config, train_set)
    out = Path(args.out or "model.npz")
    out.parent.mkdir(parents=True, exist_ok=True)
    fingerprint = save_model(model, out)
    accuracy = evaluate_accuracy(model, encode_eval_set(config, test_set))
    print(f"model: {out}")
    print(f"fingerprint: {fingerprint}")
    print(f"fault_free_accuracy: {fmt(accuracy)}")
    return EXIT_OK


def _cmd_inject(args) -> int:
    if args.config:
        config = ExperimentConfig.load(args.config)
        rows = args.rows or config.crossbar_rows
        cols = args.cols or config.crossbar_cols
    else:
        if not args.rows or not args.cols:
            raise ConfigError("inject needs --rows and --cols (or --config)")
        rows, cols = args.rows, args.cols
    fault_map = generate_fault_map(CrossbarGeometry(rows, cols), args.rate, args.seed)
    if args.out:
        save_fault_map(fault_map, args.out)
        print(f"fault map: {args.out}")
        print(f"fingerprint: {fault_map.fingerprint()}")
    if args.dump or not args.out:
        print(dump_fault_map(fault_map, max_lines=args.dump_limit))
    return EXIT_OK


def _cmd_map(args) -> int:
    fault_map = load_fault_map(args.faultmap)
    model = load_model(args.model)
    plan = build_plan(Strategy(args.strategy), fault_map, model.n_inputs, model.n_neurons)
    fingerprint = save_plan(plan, args.out)
    print(f"plan: {args.out}")
    print(f"fingerprint: {fingerprint}")
    print(
        f"strategy={plan.strategy.value} excluded={len(plan.excluded_columns)} "
        f"usable={plan.usable_cols} passes={plan.passes}"
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    config = _load_config(args)
    model = load_model(args.model)
    _, test_set = load_split(config)
    encoded = encode_eval_set(config, test_set)
    fault_map = generate_fault_map(config.geometry, args.rate, args.seed)
    row = eval_row(model, encoded, fault_map, Strategy(args.strategy), config)
    text = rows_to_csv([row], SWEEP_COLUMNS)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return EXIT_OK if row["status"] == "ok" else EXIT_UNMAPPABLE


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    out_dir = Path(args.out or config.output_dir)
    result = run_sweep(
        config,
        out_dir,
        model_path=args.model,
        workers=args.workers,
    )
    meta = json.loads(result.meta_path.read_text())
    print(f"rows: {result.rows_path} ({len(result.rows)} rows)")
    print(f"aggregate: {result.aggregate_path}")
    print(f"fault_free_accuracy: {meta['fault_free_accuracy']}")
    return EXIT_OK


def _cmd_analyze_neurons(args) -> int:
    config = _load_config(args)
    if args.model:
        model = load_model(args.model)
        _, test_set = load_split(config)
    else:
        train_set, test_set = load_split(config)
        model = train_model(config, train_set)
    encoded = encode_eval_set(config, test_set)
    rates = args.rates if args.rates is not None else None
    rows = analyze_rows(model, encoded, config, rates=rates, seeds=args.seeds)
    text = rows_to_csv(
        [{k: fmt(v) for k, v in row.items()} for row in rows], ANALYZE_COLUMNS
    )
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        print(f"report: {out}")
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snnfault",
        description="Crossbar SNN simulation under permanent faults, "
        "fault-aware mapping, and cost modeling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and store a checkpoint")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int, help="override the training seed")
    p.add_argument("--out", help="checkpoint path (default model.npz)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("inject", help="generate a seeded fault map")
    p.add_argument("--config", help="take geometry from a config file")
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="fault map output path")
    p.add_argument("--dump", action="store_true", help="print a readable listing")
    p.add_argument("--dump-limit", type=int, default=64, help="max synapse lines")
    p.set_defaults(func=_cmd_inject)

    p = sub.add_parser("map", help="build a mapping plan against a fault map")
    p.add_argument("--strategy", required=True, choices=[s.value for s in Strategy])
    p.add_argument("--faultmap", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_map)

    p = sub.add_parser("eval", help="evaluate one strategy on one fault map")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--strategy", required=True, choices=[s.value for s in Strategy])
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write the CSV row here as well")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="run the full strategy x rate x seed sweep")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--model", help="reuse an existing checkpoint")
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser(
        "analyze-neurons", help="accuracy impact of each faulty neuron operation"
    )
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--model", help="reuse an existing checkpoint")
    p.add_argument("--rates", type=float, nargs="*", default=None)
    p.add_argument("--seeds", type=int, nargs="*", default=None)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=_cmd_analyze_neurons)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except UnmappableError as exc:
        print(f"unmappable: {exc}", file=sys.stderr)
        return EXIT_UNMAPPABLE


if __name__ == "__main__":
    raise SystemExit(main())
