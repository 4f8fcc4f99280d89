"""Experiment orchestration: seeded runs, aggregation, artifact emission.

Every run re-derives its seed from the master seed, draws its own train/test
subsamples, elects a fresh topology, trains the detector and evaluates it
frozen over the slot stream.  Aggregates are mean +- 1.96 * stderr over the
runs.  All artifacts (metrics.json, comparison.csv, roc_*.csv,
splitter_trace.csv, topology.json) are byte-reproducible from the config
and master seed; wall-clock timings stay out of them by design.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import metrics as met
from .config import ExperimentConfig
from .detectors import EvalResult, make_detector
from .errors import ConfigError, DatasetError, SingleClassError
from .ingest import ConnectionRecord, Dataset, build_dataset, parse_file
from .topology import (
    ClusterAssignment,
    SensorNode,
    elect_cluster_heads,
    slot_trace_csv,
    stream_slots,
    synthesize_nodes,
    topology_json,
)

logger = logging.getLogger(__name__)

METRIC_KEYS = ("ar", "dr", "fnr", "precision", "recall", "f1", "auc")


def run_seed_for(master_seed: int, run_index: int) -> int:
    return (master_seed * 1_000_003 + 7_919 * run_index + 13) % (2**31 - 1)


def load_records(path: str, strict: bool) -> list[ConnectionRecord]:
    if not path:
        raise DatasetError("no dataset path configured")
    if not os.path.exists(path):
        raise DatasetError(f"dataset not found: {path}")
    try:
        records, bad = parse_file(path, strict=strict)
    except OSError as e:
        raise DatasetError(f"cannot read {path}: {e}") from None
    if bad:
        logger.warning("%s: skipped %d malformed lines", path, bad)
    if not records:
        raise DatasetError(f"{path} holds no records")
    return records


def _subsample(records: list[ConnectionRecord], fraction: float, seed: int):
    if fraction >= 1.0:
        return records
    n = len(records)
    k = int(np.floor(fraction * n))
    idx = np.random.default_rng(seed).permutation(n)[:k]
    idx.sort()
    return [records[i] for i in idx]


@dataclass
class RunData:
    train: Dataset
    test: Dataset
    nodes: list[SensorNode]
    topology: ClusterAssignment
    batches: list


def prepare_run(
    cfg: ExperimentConfig,
    run_seed: int,
    train_records: list[ConnectionRecord],
    test_records: list[ConnectionRecord],
) -> RunData:
    train_part = _subsample(train_records, cfg.train_subsample, run_seed)
    test_part = _subsample(test_records, cfg.test_subsample, run_seed + 1)
    if not train_part or not test_part:
        raise DatasetError("subsampling produced an empty split")
    train = build_dataset(train_part, strict_labels=cfg.strict_labels)
    test = build_dataset(
        test_part,
        encoding=train.encoding,
        bounds=train.bounds,
        strict_labels=cfg.strict_labels,
    )
    nodes = synthesize_nodes(cfg.nodes, run_seed)
    topo = elect_cluster_heads(nodes, cfg.clusters)
    batches = stream_slots(test, topo, cfg.slot_length)
    return RunData(train=train, test=test, nodes=nodes, topology=topo, batches=batches)


def evaluate_detector(cfg: ExperimentConfig, data: RunData, run_seed: int):
    det = make_detector(cfg)
    det.train(data.train, run_seed)
    result = det.evaluate(data.batches, data.test, run_seed)
    counts = met.accumulate_many(
        met.ConfusionCounts(), result.verdicts, data.test.truth
    )
    try:
        roc = met.roc_curve(list(zip(result.scores, data.test.truth)))
    except SingleClassError:
        roc = None
    return met.report(counts, roc), roc, result


@dataclass
class RunReport:
    detector: str
    per_run: list[dict]
    aggregate: dict
    wall_clock: list[float] = field(default_factory=list)


def aggregate_metrics(per_run: list[dict]) -> dict:
    out = {}
    for key in METRIC_KEYS:
        values = [r[key] for r in per_run]
        if any(v is None for v in values):
            out[key] = {"mean": None, "ci95": None}
            continue
        arr = np.asarray(values, dtype=float)
        mean = float(arr.mean())
        if arr.size > 1:
            half = float(1.96 * arr.std(ddof=1) / np.sqrt(arr.size))
        else:
            half = 0.0
        out[key] = {"mean": mean, "ci95": half}
    return out


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> RunReport:
    """Train and evaluate one detector over `cfg.runs` seeded runs."""
    train_records = load_records(cfg.train_path, cfg.strict_labels)
    test_records = load_records(cfg.test_path, cfg.strict_labels)
    per_run: list[dict] = []
    wall: list[float] = []
    artifacts: dict[str, str] = {}
    for run in range(cfg.runs):
        rs = run_seed_for(cfg.seed, run)
        t0 = time.perf_counter()
        data = prepare_run(cfg, rs, train_records, test_records)
        report, roc, result = evaluate_detector(cfg, data, rs)
        wall.append(time.perf_counter() - t0)
        per_run.append(report)
        if run == 0 and write:
            if roc is not None:
                artifacts[f"roc_{cfg.detector}.csv"] = met.roc_points_csv(roc)
            if result.splitter_trace:
                artifacts["splitter_trace.csv"] = "\n".join(result.splitter_trace) + "\n"
            artifacts["topology.json"] = topology_json(data.nodes, data.topology)
            if cfg.log_slots:
                artifacts["slot_trace.csv"] = slot_trace_csv(data.batches)
        logger.info(
            "%s run %d/%d done in %.2fs (ar=%s)",
            cfg.detector, run + 1, cfg.runs, wall[-1], report["ar"],
        )
    rr = RunReport(
        detector=cfg.detector,
        per_run=per_run,
        aggregate=aggregate_metrics(per_run),
        wall_clock=wall,
    )
    if write:
        artifacts["metrics.json"] = metrics_json(cfg, rr)
        write_artifacts(cfg.output_dir, artifacts)
    return rr


def metrics_json(cfg: ExperimentConfig, rr: RunReport) -> str:
    payload = {
        "detector": rr.detector,
        "config": cfg.as_dict(),
        "runs": rr.per_run,
        "aggregate": rr.aggregate,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_artifacts(output_dir: str, artifacts: dict[str, str]) -> None:
    os.makedirs(output_dir, exist_ok=True)
    for name, text in artifacts.items():
        with open(os.path.join(output_dir, name), "w", encoding="utf-8") as fh:
            fh.write(text)


# --- multi-detector comparison -------------------------------------------------

_SHARED_KEYS = (
    "train_path", "test_path", "train_subsample", "test_subsample",
    "seed", "runs", "nodes", "clusters", "slot_length", "strict_labels",
)


def compare(cfgs: list[ExperimentConfig], write: bool = True) -> list[RunReport]:
    """Evaluate several configs on identical per-run data and splits."""
    if len(cfgs) < 2:
        raise ConfigError("compare needs at least two configs")
    base = cfgs[0]
    for c in cfgs[1:]:
        for key in _SHARED_KEYS:
            if getattr(c, key) != getattr(base, key):
                raise ConfigError(f"compared configs must share {key}")
    train_records = load_records(base.train_path, base.strict_labels)
    test_records = load_records(base.test_path, base.strict_labels)

    per_cfg_runs: list[list[dict]] = [[] for _ in cfgs]
    per_cfg_wall: list[list[float]] = [[] for _ in cfgs]
    artifacts: dict[str, str] = {}
    for run in range(base.runs):
        rs = run_seed_for(base.seed, run)
        data = prepare_run(base, rs, train_records, test_records)
        if run == 0 and write:
            artifacts["topology.json"] = topology_json(data.nodes, data.topology)
        for i, cfg in enumerate(cfgs):
            t0 = time.perf_counter()
            report, roc, result = evaluate_detector(cfg, data, rs)
            per_cfg_wall[i].append(time.perf_counter() - t0)
            per_cfg_runs[i].append(report)
            if run == 0 and write:
                if roc is not None:
                    artifacts[f"roc_{cfg.detector}.csv"] = met.roc_points_csv(roc)
                if result.splitter_trace:
                    artifacts[f"splitter_trace_{cfg.detector}.csv"] = (
                        "\n".join(result.splitter_trace) + "\n"
                    )
        logger.info("compare run %d/%d done", run + 1, base.runs)

    reports = [
        RunReport(
            detector=cfg.detector,
            per_run=per_cfg_runs[i],
            aggregate=aggregate_metrics(per_cfg_runs[i]),
            wall_clock=per_cfg_wall[i],
        )
        for i, cfg in enumerate(cfgs)
    ]
    if write:
        artifacts["comparison.csv"] = comparison_csv(reports)
        for cfg, rr in zip(cfgs, reports):
            artifacts[f"metrics_{cfg.detector}.json"] = metrics_json(cfg, rr)
        write_artifacts(base.output_dir, artifacts)
    return reports


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(v)


def comparison_csv(reports: list[RunReport]) -> str:
    header = ["detector"]
    for key in METRIC_KEYS:
        header += [key, f"{key}_ci95"]
    lines = [",".join(header)]
    for rr in reports:
        row = [rr.detector]
        for key in METRIC_KEYS:
            row += [_fmt(rr.aggregate[key]["mean"]), _fmt(rr.aggregate[key]["ci95"])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def comparison_table(reports: list[RunReport]) -> str:
    """Fixed-width text table of aggregate metrics per detector."""
    cols = ["detector"] + list(METRIC_KEYS) + ["s/run"]
    widths = [10] + [18] * len(METRIC_KEYS) + [8]
    rows = [cols]
    for rr in reports:
        row = [rr.detector]
        for key in METRIC_KEYS:
            agg = rr.aggregate[key]
            if agg["mean"] is None:
                row.append("n/a")
            else:
                row.append(f"{agg['mean']:.4f} +- {agg['ci95']:.4f}")
        mean_wall = sum(rr.wall_clock) / max(1, len(rr.wall_clock))
        row.append(f"{mean_wall:.1f}")
        rows.append(row)
    lines = []
    for r in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def sweep(cfg: ExperimentConfig, seeds: list[int], write: bool = True) -> list[RunReport]:
    """Re-run one experiment under several master seeds."""
    reports = []
    for s in seeds:
        c = parse_like(cfg, seed=s)
        reports.append(run_experiment(c, write=False))
    if write:
        lines = ["seed," + ",".join(METRIC_KEYS)]
        for s, rr in zip(seeds, reports):
            lines.append(
                f"{s}," + ",".join(_fmt(rr.aggregate[k]["mean"]) for k in METRIC_KEYS)
            )
        write_artifacts(cfg.output_dir, {"sweep.csv": "\n".join(lines) + "\n"})
    return reports


def parse_like(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    d = cfg.as_dict()
    d.update(changes)
    return ExperimentConfig(**d)
