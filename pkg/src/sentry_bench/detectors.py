"""Uniform train/evaluate adapters over the five detector families.

Every adapter trains from a Dataset and then classifies the evaluation
stream batch by batch, returning per-record verdicts plus the real-valued
score used for ROC sweeps (vote share, P(intrusive), scaled core distance,
or action-value gap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import asch, edbscan, forest, rbm, rl
from .config import ExperimentConfig
from .errors import EmptyTrainingSetError
from .ingest import Dataset
from .topology import SlotBatch


@dataclass
class EvalResult:
    verdicts: np.ndarray
    scores: np.ndarray
    splitter_trace: list[str] = field(default_factory=list)


class AschDetector:
    """Forest misuse + E-DBSCAN anomaly behind the adaptive splitter."""

    name = "asch"

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.hybrid: asch.HybridDetector | None = None
        self.tuning_trace: list[str] = []
        self._window = 0

    def train(self, train: Dataset, seed: int) -> None:
        cfg = self.cfg
        rng = np.random.default_rng(seed)
        n_vars = cfg.forest_vars or max(1, round(math.sqrt(train.x.shape[1])))
        f = forest.train_forest(train.x, train.truth, cfg.forest_trees, n_vars, seed)

        normal = train.x[~train.truth]
        if normal.shape[0] == 0:
            raise EmptyTrainingSetError("no normal traffic to profile")
        if normal.shape[0] > cfg.edbscan_fit_cap:
            keep = rng.choice(normal.shape[0], cfg.edbscan_fit_cap, replace=False)
            normal = normal[keep]
        eps = cfg.edbscan_epsilon or edbscan.k_distance_epsilon(
            normal, cfg.edbscan_min_pts, seed=seed
        )
        model = edbscan.edbscan_fit(
            normal, eps, cfg.edbscan_min_pts, cfg.edbscan_var_threshold
        )
        state = asch.initial_state(
            alpha=cfg.asch_alpha,
            init=cfg.asch_init,
            delta_d=cfg.asch_delta_d,
            clamp=(cfg.asch_clamp_lo, cfg.asch_clamp_hi),
        )
        self.hybrid = asch.HybridDetector(forest=f, anomaly=model, state=state)
        self.tuning_trace = [asch.trace_header()]
        self._window = 0
        if cfg.asch_tune:
            # settle the traffic shares on the labeled training stream
            split_rng = np.random.default_rng(seed + 1)
            n = len(train)
            for start in range(0, n, cfg.slot_length):
                rows = slice(start, min(start + cfg.slot_length, n))
                before = self.hybrid.state
                self.hybrid.classify_batch(
                    train.x[rows], split_rng, truth=train.truth[rows], update=True
                )
                self.tuning_trace.append(
                    asch.trace_row(self._window, before, self.hybrid.state)
                )
                self._window += 1

    def evaluate(self, batches: list[SlotBatch], test: Dataset, seed: int) -> EvalResult:
        split_rng = np.random.default_rng(seed + 2)
        verdicts = np.zeros(len(test), dtype=bool)
        scores = np.zeros(len(test), dtype=float)
        trace = list(self.tuning_trace)
        for b in batches:
            before = self.hybrid.state
            v, s = self.hybrid.classify_batch(
                test.x[b.rows],
                split_rng,
                truth=test.truth[b.rows] if self.cfg.asch_eval_update else None,
                update=self.cfg.asch_eval_update,
            )
            verdicts[b.rows] = v
            scores[b.rows] = s
            if self.cfg.asch_eval_update:
                trace.append(asch.trace_row(self._window, before, self.hybrid.state))
                self._window += 1
        return EvalResult(verdicts=verdicts, scores=scores, splitter_trace=trace)


class RbcDetector:
    """Stacked RBM with the two-way classification head."""

    name = "rbc"

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.stack: rbm.RbmStack | None = None

    def train(self, train: Dataset, seed: int) -> None:
        self.stack = rbm.train_stack(
            train.x,
            train.truth,
            hidden_sizes=self.cfg.hidden_sizes(),
            epochs=self.cfg.rbm_epochs,
            learning_rate=self.cfg.rbm_learning_rate,
            seed=seed,
            batch_size=self.cfg.rbm_batch,
        )

    def evaluate(self, batches: list[SlotBatch], test: Dataset, seed: int) -> EvalResult:
        verdicts = np.zeros(len(test), dtype=bool)
        scores = np.zeros(len(test), dtype=float)
        for b in batches:
            p = rbm.classify(self.stack, test.x[b.rows])
            verdicts[b.rows] = p[:, 0] >= 0.5
            scores[b.rows] = p[:, 0]
        return EvalResult(verdicts=verdicts, scores=scores)


class _QFamilyDetector:
    algorithm = "q"

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.qtable: rl.QTable | None = None
        self.spec: rl.BinningSpec | None = None
        self.trace: rl.TrainingTrace | None = None

    def _agent_config(self, seed: int) -> rl.AgentConfig:
        c = self.cfg
        return rl.AgentConfig(
            learning_rate=c.rl_learning_rate,
            discount=c.rl_discount,
            epsilon_start=c.rl_epsilon_start,
            epsilon_decay=c.rl_epsilon_decay,
            epsilon_floor=c.rl_epsilon_floor,
            episodes=c.rl_episodes,
            seed=seed,
        )

    def train(self, train: Dataset, seed: int) -> None:
        self.spec = rl.fit_binning(
            train.x, k=self.cfg.rl_state_features, bins=self.cfg.rl_bins
        )
        self.qtable, self.trace = rl.train_agent(
            train.x, train.truth, self.algorithm, self._agent_config(seed), self.spec
        )

    def evaluate(self, batches: list[SlotBatch], test: Dataset, seed: int) -> EvalResult:
        verdicts = np.zeros(len(test), dtype=bool)
        scores = np.zeros(len(test), dtype=float)
        for b in batches:
            states = rl.discretize_many(test.x[b.rows], self.spec)
            scores[b.rows] = rl.rl_scores(self.qtable, states)
            verdicts[b.rows] = scores[b.rows] >= 0.0
        return EvalResult(verdicts=verdicts, scores=scores)


class QlDetector(_QFamilyDetector):
    name = "ql"
    algorithm = "q"


class SarsaDetector(_QFamilyDetector):
    name = "sarsa"
    algorithm = "sarsa"


class TdDetector:
    """Per-action TD(0) value tables compared at classification time."""

    name = "td"

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.v_alarm: rl.ValueTable | None = None
        self.v_pass: rl.ValueTable | None = None
        self.spec: rl.BinningSpec | None = None
        self.trace: rl.TrainingTrace | None = None

    def train(self, train: Dataset, seed: int) -> None:
        c = self.cfg
        self.spec = rl.fit_binning(train.x, k=c.rl_state_features, bins=c.rl_bins)
        cfg = rl.AgentConfig(
            learning_rate=c.rl_learning_rate,
            discount=c.rl_discount,
            episodes=c.rl_episodes,
            seed=seed,
        )
        self.v_alarm, self.v_pass, self.trace = rl.train_td_detector(
            train.x, train.truth, cfg, self.spec
        )

    def evaluate(self, batches: list[SlotBatch], test: Dataset, seed: int) -> EvalResult:
        verdicts = np.zeros(len(test), dtype=bool)
        scores = np.zeros(len(test), dtype=float)
        for b in batches:
            states = rl.discretize_many(test.x[b.rows], self.spec)
            scores[b.rows] = rl.td_scores(self.v_alarm, self.v_pass, states)
            verdicts[b.rows] = scores[b.rows] >= 0.0
        return EvalResult(verdicts=verdicts, scores=scores)


_REGISTRY = {
    d.name: d for d in (AschDetector, RbcDetector, QlDetector, SarsaDetector, TdDetector)
}


def make_detector(cfg: ExperimentConfig):
    return _REGISTRY[cfg.detector](cfg)
