import numpy as np
import pytest

from sentry_bench import metrics as met
from sentry_bench.errors import (
    EmptyCountsError,
    NoPositiveVerdictsError,
    SingleClassError,
)


def brute_counts(verdicts, truths):
    """Independent recount straight from the definitions."""
    tp = sum(1 for v, t in zip(verdicts, truths) if v and t)
    fp = sum(1 for v, t in zip(verdicts, truths) if v and not t)
    fn = sum(1 for v, t in zip(verdicts, truths) if not v and t)
    tn = sum(1 for v, t in zip(verdicts, truths) if not v and not t)
    return tp, fp, tn, fn


def pairwise_auc(scores, truths):
    """P(score+ > score-) + 0.5 P(tie) over all positive/negative pairs."""
    pos = np.asarray([s for s, t in zip(scores, truths) if t])
    neg = np.asarray([s for s, t in zip(scores, truths) if not t])
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def test_accumulate_each_cell():
    c = met.ConfusionCounts()
    met.accumulate(c, True, True)
    met.accumulate(c, True, False)
    met.accumulate(c, False, True)
    met.accumulate(c, False, False)
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 1, 1)
    assert c.total == 4


def test_accuracy_rate_direct_substitution():
    c = met.ConfusionCounts(tp=40, tn=50, fp=5, fn=5)
    assert met.accuracy_rate(c) == pytest.approx(0.9)
    assert met.accuracy_rate(met.ConfusionCounts(tp=3, tn=7)) == 1.0
    with pytest.raises(EmptyCountsError):
        met.accuracy_rate(met.ConfusionCounts())


def test_detection_rate_is_the_printed_formula():
    c = met.ConfusionCounts(tp=99, fp=1)
    assert met.detection_rate(c) == pytest.approx(0.99)
    assert met.detection_rate(met.ConfusionCounts(tp=5)) == 1.0
    with pytest.raises(NoPositiveVerdictsError):
        met.detection_rate(met.ConfusionCounts(tn=10, fn=2))


def test_false_negative_rate():
    assert met.false_negative_rate(met.ConfusionCounts(tp=10, tn=5)) == 0.0
    c = met.ConfusionCounts(tp=49, tn=40, fp=10, fn=1)
    assert met.false_negative_rate(c) == pytest.approx(0.01)
    assert met.false_negative_rate(met.ConfusionCounts(fn=7)) == 1.0


def test_precision_recall_f1():
    c = met.ConfusionCounts(tp=5, fp=5, fn=5, tn=1)
    p, r, f1 = met.precision_recall_f1(c)
    assert (p, r, f1) == (0.5, 0.5, 0.5)
    # precision = recall = p -> F1 = p
    for tp, err in ((8, 2), (1, 3), (30, 1)):
        c = met.ConfusionCounts(tp=tp, fp=err, fn=err)
        p, r, f1 = met.precision_recall_f1(c)
        assert p == r == pytest.approx(f1)
    # TP = 0 with both denominators positive -> all zero, no error
    assert met.precision_recall_f1(met.ConfusionCounts(fp=3, fn=2)) == (0, 0, 0)


def test_ar_identity_and_dr_equals_precision():
    rng = np.random.default_rng(7)
    for _ in range(200):
        c = met.ConfusionCounts(*[int(v) for v in rng.integers(0, 50, size=4)])
        if c.total == 0:
            continue
        ar = met.accuracy_rate(c)
        assert ar == pytest.approx(1.0 - (c.fp + c.fn) / c.total, abs=1e-15)
        if c.tp + c.fp > 0 and c.tp + c.fn > 0:
            p, _, _ = met.precision_recall_f1(c)
            assert met.detection_rate(c) == p


def test_roc_perfect_separation():
    scores = [(0.9, True), (0.8, True), (0.2, False), (0.1, False)]
    roc = met.roc_curve(scores)
    assert roc.auc == pytest.approx(1.0)
    assert roc.points[0] == (0.0, 0.0)
    assert roc.points[-1] == (1.0, 1.0)


def test_roc_uninformative_scores():
    scores = [(0.5, True), (0.5, False), (0.5, True), (0.5, False)]
    roc = met.roc_curve(scores)
    assert roc.points == [(0.0, 0.0), (1.0, 1.0)]
    assert roc.auc == pytest.approx(0.5)


def test_roc_single_class_raises():
    with pytest.raises(SingleClassError):
        met.roc_curve([(0.5, True), (0.2, True)])


def test_roc_monotone_and_bounded():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(5, 80))
        truths = rng.random(n) < 0.5
        if truths.all() or not truths.any():
            continue
        scores = np.round(rng.random(n), 1)  # force ties
        roc = met.roc_curve(list(zip(scores, truths)))
        fpr = np.array([p[0] for p in roc.points])
        tpr = np.array([p[1] for p in roc.points])
        assert (np.diff(fpr) >= 0).all() and (np.diff(tpr) >= 0).all()
        assert fpr.min() >= 0 and tpr.max() <= 1


def test_rates_match_brute_force_recount():
    rng = np.random.default_rng(3)
    for _ in range(300):
        n = int(rng.integers(1, 120))
        verdicts = rng.random(n) < rng.uniform(0.1, 0.9)
        truths = rng.random(n) < rng.uniform(0.1, 0.9)
        c = met.accumulate_many(met.ConfusionCounts(), verdicts, truths)
        tp, fp, tn, fn = brute_counts(verdicts, truths)
        assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)
        assert met.accuracy_rate(c) == pytest.approx((tp + tn) / n, abs=1e-12)


def test_auc_matches_pairwise_oracle():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(4, 120))
        truths = rng.random(n) < 0.5
        if truths.all() or not truths.any():
            continue
        scores = np.round(rng.random(n), 2)
        roc = met.roc_curve(list(zip(scores, truths)))
        assert roc.auc == pytest.approx(pairwise_auc(scores, truths), abs=1e-12)


def test_merge_is_componentwise():
    a = met.ConfusionCounts(1, 2, 3, 4)
    b = met.ConfusionCounts(10, 20, 30, 40)
    m = a.merge(b)
    assert (m.tp, m.fp, m.tn, m.fn) == (11, 22, 33, 44)


def test_report_shape_and_guards():
    c = met.ConfusionCounts(tp=4, fp=1, tn=4, fn=1)
    roc = met.roc_curve([(0.9, True), (0.1, False)])
    rep = met.report(c, roc)
    assert set(rep) == {"ar", "dr", "fnr", "precision", "recall", "f1", "auc", "counts"}
    assert rep["counts"] == {"tp": 4, "fp": 1, "tn": 4, "fn": 1}
    empty = met.report(met.ConfusionCounts())
    assert empty["ar"] is None and empty["auc"] is None
