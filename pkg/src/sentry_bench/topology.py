"""Clustered sensor-network model: weighted CH election, trust, slot streaming.

Each node carries a degree, mobility factor, cumulative up-time, an RSSI sum
and a trust value in [0, 1].  Cluster heads are elected iteratively by
minimum combined weight

    G_n = g_d * |D_n - capacity| + g_sum * rho(n) + g_m * mobility + g_h * uptime

where rho(n) is the reciprocal of the node's RSSI sum, min-max normalized
over the remaining population (weak signal raises the weight and lowers CH
eligibility).  Ties break to the lower node id, so election is deterministic
and permutation-invariant.  The network carries no radio or energy physics:
clusters simply source time-slotted batches of dataset records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyClusterError,
    InsufficientNodesError,
    NonPositiveRssiError,
    RangeError,
)
from .ingest import Dataset


@dataclass(frozen=True)
class SensorNode:
    id: int
    degree: int
    mobility: float
    cumulative_time: float
    rssi_sum: float
    trust: float

    def __post_init__(self):
        if self.rssi_sum <= 0:
            raise NonPositiveRssiError(f"node {self.id}: rssi_sum must be > 0")
        if not 0.0 <= self.trust <= 1.0:
            raise RangeError(f"node {self.id}: trust {self.trust} outside [0,1]")


@dataclass(frozen=True)
class WeightCoefficients:
    g_d: float = 0.25
    g_sum: float = 0.25
    g_m: float = 0.25
    g_h: float = 0.25

    def __post_init__(self):
        total = self.g_d + self.g_sum + self.g_m + self.g_h
        if any(g < 0 for g in (self.g_d, self.g_sum, self.g_m, self.g_h)):
            raise ValueError("weight coefficients must be nonnegative")
        if total > 0 and abs(total - 1.0) > 1e-9:
            raise ValueError(f"coefficients must sum to 1, got {total}")


def population_rho(nodes: list[SensorNode]) -> dict[int, float]:
    """Min-max normalized reciprocal RSSI per node id (0 when all equal)."""
    recip = np.array([1.0 / n.rssi_sum for n in nodes])
    lo, hi = recip.min(), recip.max()
    if hi == lo:
        return {n.id: 0.0 for n in nodes}
    return {n.id: float((r - lo) / (hi - lo)) for n, r in zip(nodes, recip)}


def node_weight(
    node: SensorNode, capacity: int, g: WeightCoefficients, rho: float
) -> float:
    """Combined election weight; `rho` is the node's normalized reciprocal RSSI."""
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    degree_diff = abs(node.degree - capacity)
    return (
        g.g_d * degree_diff
        + g.g_sum * rho
        + g.g_m * node.mobility
        + g.g_h * node.cumulative_time
    )


@dataclass
class Cluster:
    ch_id: int
    member_ids: list[int]
    ch_trust: float = 1.0


@dataclass
class ClusterAssignment:
    clusters: list[Cluster]

    def cluster_of(self, node_id: int) -> int:
        """Index of the cluster containing node_id (as CH or member)."""
        for i, c in enumerate(self.clusters):
            if node_id == c.ch_id or node_id in c.member_ids:
                return i
        raise KeyError(node_id)


def elect_cluster_heads(
    nodes: list[SensorNode],
    num_clusters: int,
    g: WeightCoefficients | None = None,
    capacity: int | None = None,
) -> ClusterAssignment:
    """Iteratively elect `num_clusters` heads by minimum weight.

    After each election round the elected node is removed and weights are
    recomputed over the remaining population.  Capacity defaults to
    ceil(node_count / num_clusters).  Non-CH nodes then join the nearest CH
    by id distance (ties to the lower CH id).
    """
    if num_clusters < 1 or num_clusters > len(nodes):
        raise InsufficientNodesError(
            f"cannot elect {num_clusters} heads from {len(nodes)} nodes"
        )
    g = g or WeightCoefficients()
    cap = capacity if capacity is not None else -(-len(nodes) // num_clusters)

    remaining = sorted(nodes, key=lambda n: n.id)
    heads: list[SensorNode] = []
    for _ in range(num_clusters):
        rho = population_rho(remaining)
        best = min(
            remaining, key=lambda n: (node_weight(n, cap, g, rho[n.id]), n.id)
        )
        heads.append(best)
        remaining = [n for n in remaining if n.id != best.id]

    clusters = [Cluster(ch_id=h.id, member_ids=[]) for h in heads]
    for n in remaining:
        idx = min(
            range(len(heads)),
            key=lambda i: (abs(n.id - heads[i].id), heads[i].id),
        )
        clusters[idx].member_ids.append(n.id)

    by_id = {n.id: n for n in nodes}
    for c in clusters:
        if c.member_ids:
            member_trusts = [by_id[m].trust for m in c.member_ids]
            # pairwise CH<->member trust estimates synthesized once from the
            # member/CH trust product (no dynamics are modeled)
            pairwise = [by_id[m].trust * by_id[c.ch_id].trust for m in c.member_ids]
            c.ch_trust = trust_aggregate(member_trusts, pairwise)
        else:
            c.ch_trust = by_id[c.ch_id].trust
    return ClusterAssignment(clusters=clusters)


def trust_aggregate(
    member_trusts: list[float], pairwise_trusts: list[float]
) -> float:
    """Trust score of a CH: sum((T_n + 1) * T_CH_n) / sum(T_n + 1)."""
    if len(member_trusts) == 0 or len(pairwise_trusts) == 0:
        raise EmptyClusterError("trust aggregation needs at least one member")
    if len(member_trusts) != len(pairwise_trusts):
        raise RangeError("member/pairwise trust length mismatch")
    for t in list(member_trusts) + list(pairwise_trusts):
        if not 0.0 <= t <= 1.0:
            raise RangeError(f"trust {t} outside [0,1]")
    weights = np.asarray(member_trusts, dtype=float) + 1.0
    return float(np.dot(weights, pairwise_trusts) / weights.sum())


def synthesize_nodes(count: int, seed: int, degree_hint: int | None = None) -> list[SensorNode]:
    """Seeded node population with documented attribute ranges.

    degree ~ Poisson around the hint (default count/4), mobility in [0, 1],
    cumulative time in [0, 600] s, RSSI sum in (5, 100], trust in [0.5, 1].
    """
    rng = np.random.default_rng(seed)
    hint = degree_hint if degree_hint is not None else max(1, count // 4)
    nodes = []
    for i in range(count):
        nodes.append(
            SensorNode(
                id=i,
                degree=int(rng.poisson(hint)),
                mobility=float(rng.uniform(0.0, 1.0)),
                cumulative_time=float(rng.uniform(0.0, 600.0)),
                rssi_sum=float(rng.uniform(5.0, 100.0)),
                trust=float(rng.uniform(0.5, 1.0)),
            )
        )
    return nodes


@dataclass
class SlotBatch:
    slot_index: int
    rows: np.ndarray          # indices into the dataset, original order
    source_cluster: int
    ch_trust: float


def stream_slots(
    d: Dataset, topo: ClusterAssignment, slot_length: int
) -> list[SlotBatch]:
    """Deal dataset rows round-robin across clusters in slots of `slot_length`.

    Slot i holds the next `slot_length` consecutive records and is sourced
    from cluster i mod N, so concatenating batches in slot order recovers
    the dataset exactly.
    """
    if slot_length < 1:
        raise ValueError("slot_length must be >= 1")
    n = len(d)
    n_clusters = len(topo.clusters)
    batches = []
    for slot, start in enumerate(range(0, n, slot_length)):
        cluster_idx = slot % n_clusters
        batches.append(
            SlotBatch(
                slot_index=slot,
                rows=np.arange(start, min(start + slot_length, n)),
                source_cluster=cluster_idx,
                ch_trust=topo.clusters[cluster_idx].ch_trust,
            )
        )
    return batches


def topology_json(nodes: list[SensorNode], topo: ClusterAssignment) -> str:
    """Serialize nodes, attributes and clusters for the topology.json artifact."""
    payload = {
        "nodes": [
            {
                "id": n.id,
                "degree": n.degree,
                "mobility": n.mobility,
                "cumulative_time": n.cumulative_time,
                "rssi_sum": n.rssi_sum,
                "trust": n.trust,
            }
            for n in nodes
        ],
        "clusters": [
            {
                "ch_id": c.ch_id,
                "member_ids": list(c.member_ids),
                "ch_trust": c.ch_trust,
            }
            for c in topo.clusters
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def slot_trace_csv(batches: list[SlotBatch]) -> str:
    lines = ["slotIndex,cluster,recordCount"]
    lines.extend(f"{b.slot_index},{b.source_cluster},{len(b.rows)}" for b in batches)
    return "\n".join(lines) + "\n"
