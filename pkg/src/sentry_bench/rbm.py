"""Stacked restricted Boltzmann machines with a two-way classification head.

Each layer is a bipartite energy model E(v, h) = -a.v - b.h - v.W.h with
factorized conditionals sigma(b + v.W) and sigma(a + W.h).  Layers train
greedily bottom-up by one-step contrastive divergence; inputs in [0, 1] act
as visible activation probabilities.  A logistic head on the top layer's
activations produces P(intrusive) and P(normal), which sum to 1 by
construction.  Small layers can be enumerated exhaustively to obtain the
exact joint distribution, which is what the test oracles check against.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyTrainingSetError,
    TooLargeError,
)

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 20   # max X + Y for full enumeration


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class RbmLayer:
    w: np.ndarray        # (visible, hidden)
    a: np.ndarray        # visible bias
    b: np.ndarray        # hidden bias

    @property
    def n_visible(self) -> int:
        return self.a.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.b.shape[0]


def new_layer(n_visible: int, n_hidden: int, rng: np.random.Generator) -> RbmLayer:
    return RbmLayer(
        w=rng.normal(0.0, 0.01, size=(n_visible, n_hidden)),
        a=np.zeros(n_visible),
        b=np.zeros(n_hidden),
    )


def energy(v: np.ndarray, h: np.ndarray, layer: RbmLayer) -> float:
    """E(v, h) = -a.v - b.h - v.W.h for one configuration."""
    v = np.asarray(v, dtype=float)
    h = np.asarray(h, dtype=float)
    if v.shape[0] != layer.n_visible or h.shape[0] != layer.n_hidden:
        raise DimensionMismatchError("v/h lengths do not match the layer")
    return float(-(layer.a @ v) - (layer.b @ h) - v @ layer.w @ h)


def _all_configs(n: int) -> np.ndarray:
    """All 2^n binary vectors, most significant bit first."""
    idx = np.arange(2 ** n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(float)


@dataclass
class JointDistribution:
    joint: np.ndarray      # (2^X, 2^Y), P(v, h)
    p_v: np.ndarray        # (2^X,)
    p_h: np.ndarray        # (2^Y,)
    v_configs: np.ndarray
    h_configs: np.ndarray


def exhaustive_distribution(layer: RbmLayer) -> JointDistribution:
    """Exact P(V, H) = exp(-E) / Z over every binary configuration.

    Guarded to X + Y <= 20 units; also returns both marginals.
    """
    x, y = layer.n_visible, layer.n_hidden
    if x + y > EXHAUSTIVE_LIMIT:
        raise TooLargeError(f"{x}+{y} units exceed the enumeration guard")
    v = _all_configs(x)
    h = _all_configs(y)
    e = -(v @ layer.a)[:, None] - (h @ layer.b)[None, :] - (v @ layer.w) @ h.T
    joint = np.exp(-e)
    joint /= joint.sum()
    return JointDistribution(
        joint=joint,
        p_v=joint.sum(axis=1),
        p_h=joint.sum(axis=0),
        v_configs=v,
        h_configs=h,
    )


def cond_h_given_v(layer: RbmLayer, v: np.ndarray) -> np.ndarray:
    """Per-unit P(h_y = 1 | v) = sigma(b_y + sum_x v_x W_xy)."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != layer.n_visible:
        raise DimensionMismatchError("v length does not match the layer")
    return _sigmoid(v @ layer.w + layer.b)


def cond_v_given_h(layer: RbmLayer, h: np.ndarray) -> np.ndarray:
    """Per-unit P(v_x = 1 | h) = sigma(a_x + sum_y W_xy h_y)."""
    h = np.asarray(h, dtype=float)
    if h.shape[-1] != layer.n_hidden:
        raise DimensionMismatchError("h length does not match the layer")
    return _sigmoid(h @ layer.w.T + layer.a)


def cd1_train_layer(
    data: np.ndarray,
    hidden_size: int,
    epochs: int,
    learning_rate: float,
    seed: int,
    batch_size: int = 64,
) -> RbmLayer:
    """One-step contrastive divergence over shuffled mini-batches.

    Inputs must lie in [0, 1]; they are treated as visible activation
    probabilities.  Deterministic under `seed`.
    """
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[0] == 0:
        raise EmptyTrainingSetError("no rows to train the layer on")
    if hidden_size < 1:
        raise ValueError("hidden_size must be >= 1")
    rng = np.random.default_rng(seed)
    layer = new_layer(x.shape[1], hidden_size, rng)
    n = x.shape[0]
    for epoch in range(epochs):
        order = rng.permutation(n)
        recon_err = 0.0
        for start in range(0, n, batch_size):
            v0 = x[order[start : start + batch_size]]
            m = v0.shape[0]
            h0p = _sigmoid(v0 @ layer.w + layer.b)
            h0s = (rng.random(h0p.shape) < h0p).astype(float)
            v1p = _sigmoid(h0s @ layer.w.T + layer.a)
            h1p = _sigmoid(v1p @ layer.w + layer.b)
            layer.w += learning_rate * (v0.T @ h0p - v1p.T @ h1p) / m
            layer.a += learning_rate * (v0 - v1p).mean(axis=0)
            layer.b += learning_rate * (h0p - h1p).mean(axis=0)
            recon_err += float(((v0 - v1p) ** 2).sum())
        logger.debug(
            "cd1 epoch %d/%d mean reconstruction error %.6f",
            epoch + 1, epochs, recon_err / n,
        )
    return layer


@dataclass
class RbmStack:
    layers: list[RbmLayer]
    head_w: np.ndarray = field(default_factory=lambda: np.zeros(0))
    head_c: float = 0.0

    def hidden_sizes(self) -> list[int]:
        return [l.n_hidden for l in self.layers]


def stack_forward(stack: RbmStack, x: np.ndarray) -> np.ndarray:
    """Propagate activation probabilities through every layer."""
    h = np.atleast_2d(np.asarray(x, dtype=float))
    if h.shape[1] != stack.layers[0].n_visible:
        raise DimensionMismatchError(
            f"input width {h.shape[1]} != stack visible {stack.layers[0].n_visible}"
        )
    for layer in stack.layers:
        h = _sigmoid(h @ layer.w + layer.b)
    return h


def _fit_head(
    features: np.ndarray, truth: np.ndarray, iterations: int = 30, ridge: float = 1e-6
) -> tuple[np.ndarray, float]:
    """Logistic head fitted by iteratively reweighted least squares.

    Newton steps reach the (ridge-stabilized) MLE in a handful of
    iterations, which plain gradient descent visibly underfits on the
    saturated activation features.  Deterministic: no randomness involved.
    """
    y = np.asarray(truth, dtype=float)
    x = np.column_stack([features, np.ones(y.shape[0])])
    beta = np.zeros(x.shape[1])
    for _ in range(iterations):
        p = _sigmoid(np.clip(x @ beta, -35.0, 35.0))
        s = np.maximum(p * (1.0 - p), 1e-9)
        hess = (x * s[:, None]).T @ x + ridge * np.eye(x.shape[1])
        grad = x.T @ (y - p)
        step = np.linalg.solve(hess, grad)
        beta += step
        if np.abs(step).max() < 1e-8:
            break
    return beta[:-1], float(beta[-1])


def train_stack(
    x: np.ndarray,
    truth: np.ndarray,
    hidden_sizes: tuple[int, ...] = (24, 16, 8),
    epochs: int = 15,
    learning_rate: float = 0.05,
    seed: int = 0,
    batch_size: int = 64,
) -> RbmStack:
    """Greedy layerwise pretraining, then a supervised logistic head.

    Layer k+1 trains on layer k's activation probabilities.  With epochs=0
    the stack keeps its seeded random initialization and only the head fits.
    """
    if not hidden_sizes:
        raise ValueError("need at least one hidden layer")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 0:
        raise EmptyTrainingSetError("no rows to train the stack on")
    layers = []
    data = x
    for i, size in enumerate(hidden_sizes):
        if epochs > 0:
            layer = cd1_train_layer(
                data, size, epochs, learning_rate, seed + i, batch_size=batch_size
            )
        else:
            layer = new_layer(data.shape[1], size, np.random.default_rng(seed + i))
        layers.append(layer)
        data = _sigmoid(data @ layer.w + layer.b)
    stack = RbmStack(layers=layers)
    stack.head_w, stack.head_c = _fit_head(data, truth)
    return stack


def classify(stack: RbmStack, x: np.ndarray) -> np.ndarray:
    """(pIntrusive, pNormal) rows summing to 1; intrusive wins ties at 0.5."""
    top = stack_forward(stack, x)
    if stack.head_w.shape[0] != top.shape[1]:
        raise DimensionMismatchError("head width does not match the top layer")
    p_int = _sigmoid(top @ stack.head_w + stack.head_c)
    return np.column_stack([p_int, 1.0 - p_int])


def stack_to_json(stack: RbmStack) -> str:
    payload = {
        "version": 1,
        "layers": [
            {
                "visible": layer.n_visible,
                "hidden": layer.n_hidden,
                "w": [float(v) for v in layer.w.ravel()],   # row-major
                "a": [float(v) for v in layer.a],
                "b": [float(v) for v in layer.b],
            }
            for layer in stack.layers
        ],
        "head": {"w": [float(v) for v in stack.head_w], "c": float(stack.head_c)},
    }
    return json.dumps(payload, sort_keys=True)


def stack_from_json(text: str) -> RbmStack:
    payload = json.loads(text)
    if payload.get("version") != 1:
        raise ValueError(f"unsupported stack version {payload.get('version')!r}")
    layers = []
    for spec in payload["layers"]:
        x, y = int(spec["visible"]), int(spec["hidden"])
        w = np.asarray(spec["w"], dtype=float)
        a = np.asarray(spec["a"], dtype=float)
        b = np.asarray(spec["b"], dtype=float)
        if w.shape[0] != x * y or a.shape[0] != x or b.shape[0] != y:
            raise DimensionMismatchError("layer parameter shapes are inconsistent")
        layers.append(RbmLayer(w=w.reshape(x, y), a=a, b=b))
    for lower, upper in zip(layers, layers[1:]):
        if lower.n_hidden != upper.n_visible:
            raise DimensionMismatchError(
                f"layer chain broken: {lower.n_hidden} hidden feeds "
                f"{upper.n_visible} visible"
            )
    head = payload["head"]
    stack = RbmStack(
        layers=layers,
        head_w=np.asarray(head["w"], dtype=float),
        head_c=float(head["c"]),
    )
    if stack.head_w.shape[0] != layers[-1].n_hidden:
        raise DimensionMismatchError("head width does not match the top layer")
    return stack
