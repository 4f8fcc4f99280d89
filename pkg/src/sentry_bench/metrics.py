"""Confusion accounting, rate metrics, ROC curves and report serialization.

Verdicts and truths are binary: ``True`` / ``INTRUSIVE`` means intrusive,
``False`` / ``NORMAL`` means normal traffic.

Note on the detection rate: this engine computes DR = TP / (TP + FP), which
is the published formula and coincides with precision.  The conventional
detection rate TP / (TP + FN) is always reported separately as ``recall``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyCountsError,
    NoPositiveVerdictsError,
    SingleClassError,
    UndefinedMetricError,
)

INTRUSIVE = True
NORMAL = False


@dataclass
class ConfusionCounts:
    """TP/FP/TN/FN tallies.  Supports component-wise merge for parallel workers."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def merge(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn + other.fn,
        )


def accumulate(counts: ConfusionCounts, verdict: bool, truth: bool) -> ConfusionCounts:
    """Increment exactly one of the four counters in place; returns `counts`."""
    if verdict and truth:
        counts.tp += 1
    elif verdict and not truth:
        counts.fp += 1
    elif not verdict and truth:
        counts.fn += 1
    else:
        counts.tn += 1
    return counts


def accumulate_many(
    counts: ConfusionCounts, verdicts: Iterable[bool], truths: Iterable[bool]
) -> ConfusionCounts:
    v = np.asarray(list(verdicts), dtype=bool)
    t = np.asarray(list(truths), dtype=bool)
    if v.shape != t.shape:
        raise ValueError("verdict/truth length mismatch")
    counts.tp += int(np.sum(v & t))
    counts.fp += int(np.sum(v & ~t))
    counts.fn += int(np.sum(~v & t))
    counts.tn += int(np.sum(~v & ~t))
    return counts


def accuracy_rate(c: ConfusionCounts) -> float:
    """(TP + TN) / total."""
    if c.total == 0:
        raise EmptyCountsError("no scored records")
    return (c.tp + c.tn) / c.total


def detection_rate(c: ConfusionCounts) -> float:
    """TP / (TP + FP), the published form (identical to precision)."""
    if c.tp + c.fp == 0:
        raise NoPositiveVerdictsError("no intrusive verdicts issued")
    return c.tp / (c.tp + c.fp)


def false_negative_rate(c: ConfusionCounts) -> float:
    """FN / (TP + FN + FP + TN)."""
    if c.total == 0:
        raise EmptyCountsError("no scored records")
    return c.fn / c.total


def precision_recall_f1(c: ConfusionCounts) -> tuple[float, float, float]:
    """Returns (precision, recall, F1); F1 is the harmonic mean of the two."""
    if c.tp + c.fp == 0:
        raise UndefinedMetricError("precision undefined: no positive verdicts")
    if c.tp + c.fn == 0:
        raise UndefinedMetricError("recall undefined: no intrusive truths")
    precision = c.tp / (c.tp + c.fp)
    recall = c.tp / (c.tp + c.fn)
    if precision + recall == 0.0:
        return precision, recall, 0.0
    f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


@dataclass
class RocCurve:
    """FPR/TPR sweep sorted from threshold +inf down, plus trapezoidal AUC."""

    points: list[tuple[float, float]] = field(default_factory=list)
    auc: float = 0.0


def roc_curve(scores: Sequence[tuple[float, bool]]) -> RocCurve:
    """Sweep thresholds over distinct scores descending.

    Equal scores collapse into a single step.  The curve always starts at
    (0, 0) and ends at (1, 1); AUC is computed by the trapezoid rule.
    """
    s = np.asarray([p[0] for p in scores], dtype=float)
    t = np.asarray([p[1] for p in scores], dtype=bool)
    n_pos = int(t.sum())
    n_neg = int((~t).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("ROC needs both classes present")

    order = np.argsort(-s, kind="stable")
    s, t = s[order], t[order]
    tp_cum = np.cumsum(t)
    fp_cum = np.cumsum(~t)
    # keep only the last index of each tied-score group
    last_of_group = np.append(s[1:] != s[:-1], True)
    tpr = tp_cum[last_of_group] / n_pos
    fpr = fp_cum[last_of_group] / n_neg

    fpr = np.concatenate([[0.0], fpr])
    tpr = np.concatenate([[0.0], tpr])
    auc = float(np.trapezoid(tpr, fpr))
    points = [(float(x), float(y)) for x, y in zip(fpr, tpr)]
    return RocCurve(points=points, auc=auc)


def report(c: ConfusionCounts, roc: RocCurve | None = None) -> dict:
    """Assemble the metrics report dict used by metrics.json.

    Metrics whose preconditions fail on these counts are reported as None
    rather than raising, so a report can always be written.
    """
    def guarded(fn):
        try:
            return fn(c)
        except (EmptyCountsError, NoPositiveVerdictsError, UndefinedMetricError):
            return None

    prf = guarded(precision_recall_f1)
    precision, recall, f1 = prf if prf is not None else (None, None, None)
    return {
        "ar": guarded(accuracy_rate),
        "dr": guarded(detection_rate),
        "fnr": guarded(false_negative_rate),
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "auc": roc.auc if roc is not None else None,
        "counts": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn},
    }


def roc_points_csv(roc: RocCurve) -> str:
    """ROC points as 'fpr,tpr' lines with a header."""
    lines = ["fpr,tpr"]
    lines.extend(f"{fpr!r},{tpr!r}" for fpr, tpr in roc.points)
    return "\n".join(lines) + "\n"
