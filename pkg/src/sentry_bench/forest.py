"""Random-forest misuse detector: bagged, feature-subsampled decision trees.

Each tree trains on a bootstrap sample the size of the training set, draws a
fresh random subset of features at every node, and grows until its leaves
are pure (Gini criterion, depth capped at 32, minimum leaf size 1).  The
forest classifies by majority vote over trees; vote ties resolve to
intrusive, the fail-safe direction for an IDS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyTrainingSetError

MAX_DEPTH = 32


@dataclass
class _Tree:
    """Flat array form: feature[i] == -1 marks a leaf with label label[i]."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label: np.ndarray

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            cur = node[idx]
            go_left = x[idx, self.feature[cur]] < self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active[idx] = self.feature[node[idx]] >= 0
        return self.label[node]


def _best_split(x: np.ndarray, y: np.ndarray, feats: np.ndarray):
    """Exhaustive Gini search over candidate features; None when no split helps."""
    n = y.shape[0]
    total_pos = int(y.sum())
    best = (np.inf, -1, 0.0)
    for f in feats:
        col = x[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        ys = y[order]
        # split positions between distinct consecutive values
        cut = np.nonzero(xs[1:] != xs[:-1])[0] + 1
        if cut.size == 0:
            continue
        pos_prefix = np.cumsum(ys)
        left_n = cut.astype(float)
        left_pos = pos_prefix[cut - 1].astype(float)
        right_n = n - left_n
        right_pos = total_pos - left_pos
        p_l = left_pos / left_n
        p_r = right_pos / right_n
        cost = (left_n * 2.0 * p_l * (1.0 - p_l) + right_n * 2.0 * p_r * (1.0 - p_r)) / n
        i = int(np.argmin(cost))
        if cost[i] < best[0]:
            thresh = 0.5 * (xs[cut[i] - 1] + xs[cut[i]])
            best = (float(cost[i]), int(f), float(thresh))
    if best[1] < 0:
        return None
    return best[1], best[2]


def _grow(x: np.ndarray, y: np.ndarray, var: int, rng: np.random.Generator) -> _Tree:
    feature, threshold, left, right, label = [], [], [], [], []

    def leaf(ys: np.ndarray) -> int:
        i = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        pos = int(ys.sum())
        label.append(1 if 2 * pos >= ys.shape[0] else 0)  # tie -> intrusive
        return i

    def build(idx: np.ndarray, depth: int) -> int:
        ys = y[idx]
        pos = int(ys.sum())
        if pos == 0 or pos == idx.shape[0] or depth >= MAX_DEPTH or idx.shape[0] < 2:
            return leaf(ys)
        feats = rng.choice(x.shape[1], size=var, replace=False)
        split = _best_split(x[idx], ys, feats)
        if split is None:
            # the sampled subset was constant on this node; keep growing by
            # falling back to the remaining features before declaring a leaf
            rest = np.setdiff1d(np.arange(x.shape[1]), feats)
            split = _best_split(x[idx], ys, rest) if rest.size else None
        if split is None:
            return leaf(ys)
        f, t = split
        go_left = x[idx, f] < t
        i = len(feature)
        feature.append(f)
        threshold.append(t)
        left.append(-1)
        right.append(-1)
        label.append(-1)
        left[i] = build(idx[go_left], depth + 1)
        right[i] = build(idx[~go_left], depth + 1)
        return i

    build(np.arange(x.shape[0]), 0)
    return _Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        label=np.asarray(label, dtype=np.int64),
    )


@dataclass
class Forest:
    trees: list[_Tree]
    tree_count: int
    features_per_split: int
    seed: int
    n_features: int


def train_forest(
    x: np.ndarray, truth: np.ndarray, tree_count: int, features_per_split: int, seed: int
) -> Forest:
    """Train `tree_count` bagged trees; deterministic under `seed`."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(truth, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyTrainingSetError("forest needs a non-empty training matrix")
    if tree_count < 1:
        raise ValueError("tree_count must be >= 1")
    if not 1 <= features_per_split <= x.shape[1]:
        raise ValueError("features_per_split outside [1, feature count]")
    n = x.shape[0]
    trees = []
    for child_seed in np.random.SeedSequence(seed).spawn(tree_count):
        rng = np.random.default_rng(child_seed)
        boot = rng.integers(0, n, size=n)
        trees.append(_grow(x[boot], y[boot], features_per_split, rng))
    return Forest(
        trees=trees,
        tree_count=tree_count,
        features_per_split=features_per_split,
        seed=seed,
        n_features=x.shape[1],
    )


def forest_votes(f: Forest, x: np.ndarray) -> np.ndarray:
    """Fraction of trees voting intrusive, per row."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != f.n_features:
        raise DimensionMismatchError(
            f"input width {x.shape[1]} != trained width {f.n_features}"
        )
    votes = np.zeros(x.shape[0], dtype=float)
    for t in f.trees:
        votes += t.predict(x)
    return votes / f.tree_count


def forest_classify(f: Forest, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Majority-vote verdicts (ties intrusive) and the per-row vote share."""
    share = forest_votes(f, x)
    return share >= 0.5, share
