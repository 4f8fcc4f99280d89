"""Adaptive hybrid detector: forest misuse + E-DBSCAN anomaly subsystems.

A splitter state tracks each subsystem's smoothed TP/FP ratio (mu1 anomaly,
mu2 misuse) through an exponentially weighted update

    mu_k <- alpha * mu_k + (1 - alpha) * (dTP_k + 1) / (dFP_k + 1)

and their quotient I = mu1 / mu2.  When I rises the anomaly share D_a grows
by a fixed step and the misuse share D_m shrinks (and vice versa), with
D_a + D_m = 1 preserved exactly and both shares clamped.  Window counts use
add-one smoothing so zero-FP windows stay finite.  Each slot batch is one
update window; per batch a seeded random D_a-fraction of records is routed
to the anomaly subsystem and the rest to the forest.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .edbscan import EDbscanModel, anomaly_scores
from .errors import UnfittedModelError
from .forest import Forest, forest_votes

DEFAULT_ALPHA = 0.7        # weight of the previously accumulated TP/FP ratio
DEFAULT_INIT = 0.5         # initial mu for both subsystems
DEFAULT_DELTA_D = 0.05
DEFAULT_CLAMP = (0.1, 0.9)


@dataclass(frozen=True)
class AschState:
    mu1: float
    mu2: float
    indicator: float
    prev_indicator: float
    d_a: float
    d_m: float
    alpha: float = DEFAULT_ALPHA
    delta_d: float = DEFAULT_DELTA_D
    lo: float = DEFAULT_CLAMP[0]
    hi: float = DEFAULT_CLAMP[1]
    # cumulative window counters, kept for the trace
    tp1: int = 0
    fp1: int = 0
    tp2: int = 0
    fp2: int = 0


def initial_state(
    alpha: float = DEFAULT_ALPHA,
    init: float = DEFAULT_INIT,
    delta_d: float = DEFAULT_DELTA_D,
    clamp: tuple[float, float] = DEFAULT_CLAMP,
    d_a: float = 0.5,
) -> AschState:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    lo, hi = clamp
    if not (0.0 <= lo <= d_a <= hi <= 1.0):
        raise ValueError("need 0 <= lo <= d_a <= hi <= 1")
    return AschState(
        mu1=init, mu2=init, indicator=1.0, prev_indicator=1.0,
        d_a=d_a, d_m=1.0 - d_a, alpha=alpha, delta_d=delta_d, lo=lo, hi=hi,
    )


def asch_ratio_update(
    s: AschState, window_counts: tuple[int, int, int, int]
) -> AschState:
    """Fold one window's (dTP1, dFP1, dTP2, dFP2) into the smoothed ratios."""
    dtp1, dfp1, dtp2, dfp2 = window_counts
    if min(dtp1, dfp1, dtp2, dfp2) < 0:
        raise ValueError("window counts must be nonnegative")
    mu1_win = (dtp1 + 1.0) / (dfp1 + 1.0)
    mu2_win = (dtp2 + 1.0) / (dfp2 + 1.0)
    mu1 = s.alpha * s.mu1 + (1.0 - s.alpha) * mu1_win
    mu2 = s.alpha * s.mu2 + (1.0 - s.alpha) * mu2_win
    return replace(
        s,
        mu1=mu1,
        mu2=mu2,
        prev_indicator=s.indicator,
        indicator=mu1 / mu2,
        tp1=s.tp1 + dtp1,
        fp1=s.fp1 + dfp1,
        tp2=s.tp2 + dtp2,
        fp2=s.fp2 + dfp2,
    )


def asch_reallocate(s: AschState) -> AschState:
    """Step D_a toward the subsystem whose ratio trajectory improved."""
    if s.indicator > s.prev_indicator:
        d_a = s.d_a + s.delta_d
    elif s.indicator < s.prev_indicator:
        d_a = s.d_a - s.delta_d
    else:
        return s
    d_a = min(s.hi, max(s.lo, d_a))
    return replace(s, d_a=d_a, d_m=1.0 - d_a)


def asch_update(s: AschState, window_counts: tuple[int, int, int, int]) -> AschState:
    return asch_reallocate(asch_ratio_update(s, window_counts))


@dataclass
class HybridDetector:
    forest: Forest
    anomaly: EDbscanModel
    state: AschState

    def classify_batch(
        self,
        x: np.ndarray,
        rng: np.random.Generator,
        truth: np.ndarray | None = None,
        update: bool = False,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Classify one slot batch; returns (verdicts, scores) in record order.

        With update=True (tuning mode) the batch's labeled TP/FP counts feed
        one splitter window; with update=False (frozen evaluation) the state
        is left untouched.  Scores from both subsystems cross 0.5 exactly at
        their decision thresholds, so they share one ROC sweep.
        """
        if self.forest is None or self.anomaly is None:
            raise UnfittedModelError("both subsystems must be trained")
        if update and truth is None:
            raise ValueError("tuning mode needs truth labels")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = x.shape[0]
        n_anom = int(round(self.state.d_a * n))
        to_anom = np.zeros(n, dtype=bool)
        if n_anom > 0:
            to_anom[rng.choice(n, size=n_anom, replace=False)] = True

        verdicts = np.zeros(n, dtype=bool)
        scores = np.zeros(n, dtype=float)
        if to_anom.any():
            s_a = anomaly_scores(self.anomaly, x[to_anom])
            verdicts[to_anom] = s_a > 1.0
            scores[to_anom] = s_a / (1.0 + s_a)
        if (~to_anom).any():
            share = forest_votes(self.forest, x[~to_anom])
            verdicts[~to_anom] = share >= 0.5
            scores[~to_anom] = share

        if update:
            t = np.asarray(truth, dtype=bool)
            dtp1 = int(np.sum(verdicts & t & to_anom))
            dfp1 = int(np.sum(verdicts & ~t & to_anom))
            dtp2 = int(np.sum(verdicts & t & ~to_anom))
            dfp2 = int(np.sum(verdicts & ~t & ~to_anom))
            self.state = asch_update(self.state, (dtp1, dfp1, dtp2, dfp2))
        return verdicts, scores


def trace_header() -> str:
    return "windowIndex,mu1,mu2,I,D_a,D_m,dTP1,dFP1,dTP2,dFP2"


def trace_row(index: int, before: AschState, after: AschState) -> str:
    d = (
        after.tp1 - before.tp1,
        after.fp1 - before.fp1,
        after.tp2 - before.tp2,
        after.fp2 - before.fp2,
    )
    return (
        f"{index},{after.mu1!r},{after.mu2!r},{after.indicator!r},"
        f"{after.d_a!r},{after.d_m!r},{d[0]},{d[1]},{d[2]},{d[3]}"
    )
