"""Command-line harness: ingest, train, eval, compare, sweep.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal error.
Every experiment echoes its effective configuration into metrics.json so a
report is reproducible from the file alone.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

from . import rbm, rl, synthetic
from .config import DETECTORS, ExperimentConfig, parse_config
from .detectors import make_detector
from .errors import ConfigError, DatasetError
from .experiment import (
    comparison_table,
    compare,
    load_records,
    parse_like,
    prepare_run,
    run_experiment,
    run_seed_for,
    sweep,
)
from .ingest import build_dataset, dataset_to_csv

logger = logging.getLogger(__name__)

_CONFIG_FIELDS = [f.name for f in dataclasses.fields(ExperimentConfig)]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    for name in _CONFIG_FIELDS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None,
                       help=argparse.SUPPRESS)


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FIELDS
        if getattr(args, name, None) is not None
    }
    return parse_config(args.config, overrides)


def _cmd_ingest(args: argparse.Namespace) -> int:
    if args.generate:
        rows = args.rows or (49402 if args.generate == "train" else 31103)
        synthetic.generate_kdd_file(args.output, rows, args.seed, flavor=args.generate)
        print(f"generated {rows} {args.generate}-flavor records -> {args.output}")
        return 0
    if not args.data:
        raise ConfigError("ingest needs --data <file> (or --generate)")
    strict = bool(args.strict)
    records = load_records(args.data, strict)
    ds = build_dataset(records, strict_labels=strict)
    dataset_to_csv(ds, args.output)
    print(
        f"parsed {len(ds)} records ({int(ds.truth.sum())} intrusive), "
        f"{ds.unknown_label_count} unknown labels -> {args.output}"
    )
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    train_records = load_records(cfg.train_path, cfg.strict_labels)
    test_records = load_records(cfg.test_path or cfg.train_path, cfg.strict_labels)
    rs = run_seed_for(cfg.seed, 0)
    data = prepare_run(cfg, rs, train_records, test_records)
    det = make_detector(cfg)
    det.train(data.train, rs)
    os.makedirs(cfg.output_dir, exist_ok=True)

    def write(name: str, text: str) -> str:
        path = os.path.join(cfg.output_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return path

    if cfg.detector in ("ql", "sarsa"):
        path = write("qtable.json", rl.qtable_to_json(det.qtable, det.spec))
        print(f"trained {cfg.detector} on {len(data.train)} records -> {path}")
    elif cfg.detector == "td":
        payload = {
            "version": 1,
            "alarm": {str(s): v for s, v in sorted(det.v_alarm.items())},
            "pass": {str(s): v for s, v in sorted(det.v_pass.items())},
        }
        path = write("td_values.json", json.dumps(payload, sort_keys=True))
        print(f"trained td on {len(data.train)} records -> {path}")
    elif cfg.detector == "rbc":
        path = write("rbm_stack.json", rbm.stack_to_json(det.stack))
        print(f"trained rbc on {len(data.train)} records -> {path}")
    else:
        path = write("splitter_trace.csv", "\n".join(det.tuning_trace) + "\n")
        state = det.hybrid.state
        write("asch_state.json", json.dumps({
            "mu1": state.mu1, "mu2": state.mu2, "indicator": state.indicator,
            "d_a": state.d_a, "d_m": state.d_m,
        }, sort_keys=True))
        print(
            f"trained asch on {len(data.train)} records "
            f"(D_a={state.d_a:.2f}, D_m={state.d_m:.2f}) -> {path}"
        )
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    rr = run_experiment(cfg)
    print(comparison_table([rr]), end="")
    print(f"artifacts -> {cfg.output_dir}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    names = [d.strip() for d in args.detectors.split(",") if d.strip()]
    if len(names) < 2:
        raise ConfigError("compare needs at least two detectors")
    for name in names:
        if name not in DETECTORS:
            raise ConfigError(
                f"unknown detector {name!r}; valid options: " + ", ".join(DETECTORS)
            )
    cfgs = [parse_like(cfg, detector=name) for name in names]
    reports = compare(cfgs)
    print(comparison_table(reports), end="")
    print(f"artifacts -> {cfg.output_dir}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad --seeds list: {args.seeds!r}") from None
    if not seeds:
        raise ConfigError("sweep needs at least one seed")
    reports = sweep(cfg, seeds)
    for s, rr in zip(seeds, reports):
        ar = rr.aggregate["ar"]["mean"]
        print(f"seed {s}: ar={ar:.4f}" if ar is not None else f"seed {s}: ar=n/a")
    print(f"artifacts -> {cfg.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentry-bench",
        description="Benchmark intrusion detectors on KDD'99-style traffic "
                    "streamed through a simulated sensor-cluster network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse/encode a KDD file or generate one")
    p.add_argument("--data", help="KDD-format input file")
    p.add_argument("--output", required=True, help="output CSV (or generated file)")
    p.add_argument("--strict", action="store_true",
                   help="fail on malformed lines and unknown labels")
    p.add_argument("--generate", choices=["train", "test"],
                   help="emit a synthetic KDD-format corpus instead of parsing")
    p.add_argument("--rows", type=int, default=0, help="rows to generate")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.set_defaults(func=_cmd_ingest)

    for name, fn, extra in (
        ("train", _cmd_train, "train one detector and save its model artifacts"),
        ("eval", _cmd_eval, "train + frozen evaluation over the slot stream"),
        ("compare", _cmd_compare, "evaluate several detectors on shared runs"),
        ("sweep", _cmd_sweep, "repeat an experiment across master seeds"),
    ):
        p = sub.add_parser(name, help=extra)
        _add_config_flags(p)
        if name == "compare":
            p.add_argument("--detectors", default=",".join(DETECTORS),
                           help="comma-separated detector list")
        if name == "sweep":
            p.add_argument("--seeds", required=True,
                           help="comma-separated master seeds")
        p.set_defaults(func=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="[%(levelname)s] %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except DatasetError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
