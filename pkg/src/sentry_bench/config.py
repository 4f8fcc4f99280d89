"""Experiment configuration: flat key=value files, flag overrides, validation.

Defaults trace to the published testing settings (20 sensors, 4 clusters,
alpha 0.7, INIT 0.5, trust in [0,1], 41-feature records, 3 hidden layers,
10 runs at 95% confidence).  Simulation time and packet size are recorded
for provenance only; nothing in a record-stream model consumes them.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .errors import ConfigError

DETECTORS = ("asch", "rbc", "ql", "sarsa", "td")


@dataclass
class ExperimentConfig:
    # data
    train_path: str = ""
    test_path: str = ""
    train_subsample: float = 1.0     # seeded fraction of the training file
    test_subsample: float = 1.0
    strict_labels: bool = False
    # experiment
    detector: str = "ql"
    nodes: int = 20
    clusters: int = 4
    slot_length: int = 256
    runs: int = 10
    seed: int = 0
    output_dir: str = "out"
    log_slots: bool = False
    # hybrid (asch)
    forest_trees: int = 15
    forest_vars: int = 0             # 0 -> round(sqrt(feature count))
    edbscan_epsilon: float = 0.0     # 0 -> k-distance elbow heuristic
    edbscan_min_pts: int = 5
    edbscan_var_threshold: float = float("inf")
    edbscan_fit_cap: int = 4000
    asch_alpha: float = 0.7
    asch_init: float = 0.5
    asch_delta_d: float = 0.05
    asch_clamp_lo: float = 0.1
    asch_clamp_hi: float = 0.9
    asch_tune: bool = True           # splitter updates on the training stream
    asch_eval_update: bool = False   # label-fed updates during evaluation
    # rbm (rbc)
    rbm_hidden: str = "24,16,8"
    rbm_epochs: int = 15
    rbm_learning_rate: float = 0.05
    rbm_batch: int = 64
    # rl (ql / sarsa / td)
    rl_learning_rate: float = 0.1
    rl_discount: float = 0.9
    rl_epsilon_start: float = 1.0
    rl_epsilon_decay: float = 0.995
    rl_epsilon_floor: float = 0.01
    rl_episodes: int = 8
    rl_state_features: int = 8
    rl_bins: int = 3
    # provenance only (no observable effect in a record-stream model)
    simulation_time_s: int = 600
    packet_size_bytes: int = 250
    operational_area: str = "100x100"
    communication_range_m: int = 100

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.detector not in DETECTORS:
            raise ConfigError(
                f"unknown detector {self.detector!r}; valid options: "
                + ", ".join(DETECTORS)
            )
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.nodes < self.clusters:
            raise ConfigError("need at least as many nodes as clusters")
        if self.slot_length < 1:
            raise ConfigError("slot_length must be >= 1")
        for name in ("train_subsample", "test_subsample"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1]")

    def hidden_sizes(self) -> tuple[int, ...]:
        try:
            sizes = tuple(int(s) for s in self.rbm_hidden.split(",") if s.strip())
        except ValueError:
            raise ConfigError(f"rbm_hidden {self.rbm_hidden!r} is not a size list")
        if not sizes or any(s < 1 for s in sizes):
            raise ConfigError("rbm_hidden needs positive sizes")
        return sizes

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    f = _FIELDS[key]
    text = raw.strip()
    if f.type in ("bool", bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{text!r} is not a boolean")
    if f.type in ("int", int):
        return int(text)
    if f.type in ("float", float):
        return float(text)
    return text


def parse_config_file(path: str) -> dict:
    """Read a flat key=value file; '#' starts a comment; blank lines skipped."""
    values: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as e:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {e}") from None
    return values


def parse_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from an optional file plus flag overrides (flags win)."""
    values = parse_config_file(path) if path else {}
    for key, raw in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(raw, str):
            try:
                values[key] = _coerce(key, raw)
            except ValueError as e:
                raise ConfigError(f"bad value for {key!r}: {e}") from None
        else:
            values[key] = raw
    try:
        return ExperimentConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e)) from None
