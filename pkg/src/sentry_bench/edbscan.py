"""Density-based clustering with a local-density-variance core filter.

Standard DBSCAN semantics with one refinement: a candidate core object whose
epsilon-neighborhood exhibits too much variation in local density (variance
of the neighbor counts across its neighborhood above `var_threshold`) is
demoted to border status before cluster expansion.  Neighborhoods include
the point itself, so a candidate core needs >= min_pts neighbors inclusive.

Cluster membership is order-independent: clusters are the connected
components of the epsilon-graph restricted to core objects, and border
points join the cluster of their nearest core (ties to the lowest core
index).  Anomaly classification flags any point farther than epsilon from
every core object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, UnfittedModelError

CORE, BORDER, NOISE = 0, 1, 2


@dataclass
class EDbscanModel:
    epsilon: float
    min_pts: int
    var_threshold: float
    points: np.ndarray            # training points (n, d)
    labels: np.ndarray            # cluster id per point, -1 for noise
    roles: np.ndarray             # CORE / BORDER / NOISE per point
    core_points: np.ndarray       # (n_core, d) view used by classification
    n_clusters: int


def _pairwise_sq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances via the dot-product expansion."""
    aa = np.einsum("ij,ij->i", a, a)[:, None]
    bb = np.einsum("ij,ij->i", b, b)[None, :]
    sq = aa + bb - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return sq


def _neighbor_lists(x: np.ndarray, eps: float, block: int = 1024):
    n = x.shape[0]
    eps_sq = eps * eps
    neighbors: list[np.ndarray] = []
    counts = np.zeros(n, dtype=np.int64)
    for start in range(0, n, block):
        sq = _pairwise_sq(x[start : start + block], x)
        for r in range(sq.shape[0]):
            idx = np.nonzero(sq[r] <= eps_sq)[0]
            neighbors.append(idx)
            counts[start + r] = idx.size
    return neighbors, counts


def edbscan_fit(
    points: np.ndarray, epsilon: float, min_pts: int, var_threshold: float = np.inf
) -> EDbscanModel:
    """Cluster `points`; see the module docstring for the exact semantics."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if min_pts < 2:
        raise ValueError("min_pts must be >= 2")
    x = np.atleast_2d(np.asarray(points, dtype=float))
    n = x.shape[0]
    neighbors, counts = _neighbor_lists(x, epsilon)

    candidate = counts >= min_pts
    is_core = candidate.copy()
    for i in np.nonzero(candidate)[0]:
        if np.var(counts[neighbors[i]]) > var_threshold:
            is_core[i] = False

    labels = np.full(n, -1, dtype=np.int64)
    roles = np.full(n, NOISE, dtype=np.int64)
    cluster = 0
    for i in range(n):
        if not is_core[i] or labels[i] >= 0:
            continue
        # BFS over density-connected cores
        labels[i] = cluster
        queue = [i]
        while queue:
            j = queue.pop()
            for k in neighbors[j]:
                if is_core[k] and labels[k] < 0:
                    labels[k] = cluster
                    queue.append(int(k))
        cluster += 1
    roles[is_core] = CORE

    core_idx = np.nonzero(is_core)[0]
    if core_idx.size:
        eps_sq = epsilon * epsilon
        for i in range(n):
            if is_core[i]:
                continue
            cand = neighbors[i][is_core[neighbors[i]]]
            if cand.size == 0:
                continue
            d = np.einsum("ij,ij->i", x[cand] - x[i], x[cand] - x[i])
            near = cand[d <= eps_sq]
            if near.size:
                dn = d[d <= eps_sq]
                best = near[np.lexsort((near, dn))][0]
                labels[i] = labels[best]
                roles[i] = BORDER
    return EDbscanModel(
        epsilon=float(epsilon),
        min_pts=int(min_pts),
        var_threshold=float(var_threshold),
        points=x,
        labels=labels,
        roles=roles,
        core_points=x[core_idx],
        n_clusters=cluster,
    )


def anomaly_scores(m: EDbscanModel, x: np.ndarray) -> np.ndarray:
    """Distance to the nearest core object, scaled by epsilon (>1 means anomalous)."""
    if m is None or m.points is None:
        raise UnfittedModelError("anomaly model not fitted")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != m.points.shape[1]:
        raise DimensionMismatchError(
            f"input width {x.shape[1]} != fitted width {m.points.shape[1]}"
        )
    if m.core_points.shape[0] == 0:
        return np.full(x.shape[0], np.inf)
    best = np.full(x.shape[0], np.inf)
    for start in range(0, x.shape[0], 2048):
        sq = _pairwise_sq(x[start : start + 2048], m.core_points)
        best[start : start + 2048] = np.sqrt(sq.min(axis=1))
    return best / m.epsilon


def anomaly_classify(m: EDbscanModel, x: np.ndarray) -> np.ndarray:
    """True (intrusive) where the point is not density-reachable from any cluster."""
    return anomaly_scores(m, x) > 1.0


def k_distance_epsilon(points: np.ndarray, k: int, sample_cap: int = 2000,
                       seed: int = 0) -> float:
    """Elbow of the sorted k-distance curve on a seeded subsample.

    The elbow is the point of maximum distance from the chord joining the
    first and last points of the ascending k-distance curve.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[0] > sample_cap:
        idx = np.random.default_rng(seed).choice(x.shape[0], sample_cap, replace=False)
        x = x[idx]
    sq = _pairwise_sq(x, x)
    kth = np.sqrt(np.sort(sq, axis=1)[:, min(k, x.shape[0] - 1)])
    curve = np.sort(kth)
    n = curve.shape[0]
    if n < 3 or curve[-1] == curve[0]:
        return float(curve[-1]) if curve[-1] > 0 else 1.0
    t = np.arange(n, dtype=float) / (n - 1)
    chord = curve[0] + t * (curve[-1] - curve[0])
    elbow = int(np.argmax(np.abs(curve - chord)))
    eps = float(curve[elbow])
    return eps if eps > 0 else float(curve[-1])
