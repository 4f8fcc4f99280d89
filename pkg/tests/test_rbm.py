import numpy as np
import pytest

from sentry_bench import rbm
from sentry_bench.errors import (
    DimensionMismatchError,
    EmptyTrainingSetError,
    TooLargeError,
)


def make_layer(x, y, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return rbm.RbmLayer(
        w=rng.normal(0, scale, size=(x, y)),
        a=rng.normal(0, scale, size=x),
        b=rng.normal(0, scale, size=y),
    )


def zero_layer(x, y):
    return rbm.RbmLayer(w=np.zeros((x, y)), a=np.zeros(x), b=np.zeros(y))


def config_index(bits):
    """Row index of a binary configuration in the MSB-first enumeration."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def test_energy_zero_parameters():
    layer = zero_layer(3, 2)
    for v in ([0, 0, 0], [1, 0, 1], [1, 1, 1]):
        for h in ([0, 0], [1, 1]):
            assert rbm.energy(np.array(v), np.array(h), layer) == 0.0


def test_energy_direct_substitution():
    layer = rbm.RbmLayer(w=np.array([[2.0]]), a=np.zeros(1), b=np.zeros(1))
    assert rbm.energy(np.ones(1), np.ones(1), layer) == -2.0


def test_energy_linear_in_bias():
    layer = make_layer(4, 3, seed=1)
    v = np.array([1.0, 0.0, 1.0, 1.0])
    h = np.array([0.0, 1.0, 1.0])
    base = rbm.energy(v, h, layer)
    delta = 0.37
    layer.a[0] += delta
    assert rbm.energy(v, h, layer) == pytest.approx(base - delta * v[0], abs=1e-12)
    layer.b[1] += delta
    assert rbm.energy(v, h, layer) == pytest.approx(
        base - delta * v[0] - delta * h[1], abs=1e-12
    )


def test_energy_dimension_guard():
    layer = zero_layer(3, 2)
    with pytest.raises(DimensionMismatchError):
        rbm.energy(np.zeros(2), np.zeros(2), layer)


def test_exhaustive_uniform_for_zero_parameters():
    layer = zero_layer(2, 1)
    dist = rbm.exhaustive_distribution(layer)
    assert dist.joint.shape == (4, 2)
    assert np.allclose(dist.joint, 1.0 / 8.0)


def test_exhaustive_normalizes_and_marginalizes():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x, y = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        layer = make_layer(x, y, seed=int(rng.integers(1e6)))
        dist = rbm.exhaustive_distribution(layer)
        assert dist.joint.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(dist.p_v, dist.joint.sum(axis=1))
        assert np.allclose(dist.p_h, dist.joint.sum(axis=0))


def test_exhaustive_guard():
    with pytest.raises(TooLargeError):
        rbm.exhaustive_distribution(zero_layer(15, 10))


def test_conditionals_zero_parameters_half():
    layer = zero_layer(5, 4)
    assert np.allclose(rbm.cond_h_given_v(layer, np.ones(5)), 0.5)
    assert np.allclose(rbm.cond_v_given_h(layer, np.zeros(4)), 0.5)


def test_conditionals_match_joint_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(25):
        x, y = int(rng.integers(1, 7)), int(rng.integers(1, 6))
        layer = make_layer(x, y, seed=int(rng.integers(1e6)), scale=1.5)
        dist = rbm.exhaustive_distribution(layer)
        v = rng.integers(0, 2, size=x).astype(float)
        vi = config_index(v)
        cond = rbm.cond_h_given_v(layer, v)
        for unit in range(y):
            on = dist.h_configs[:, unit] == 1
            joint_cond = dist.joint[vi, on].sum() / dist.joint[vi].sum()
            assert cond[unit] == pytest.approx(joint_cond, abs=1e-9)
        h = rng.integers(0, 2, size=y).astype(float)
        hi = config_index(h)
        cond_v = rbm.cond_v_given_h(layer, h)
        for unit in range(x):
            on = dist.v_configs[:, unit] == 1
            joint_cond = dist.joint[on, hi].sum() / dist.joint[:, hi].sum()
            assert cond_v[unit] == pytest.approx(joint_cond, abs=1e-9)


def test_conditional_saturation():
    layer = zero_layer(3, 2)
    layer.b[0] = 20.0
    p = rbm.cond_h_given_v(layer, np.zeros(3))
    assert p[0] >= 1.0 - 1e-8


def test_cd1_zero_learning_rate_is_identity():
    rng = np.random.default_rng(4)
    data = rng.random((40, 6))
    trained = rbm.cd1_train_layer(data, 3, epochs=5, learning_rate=0.0, seed=11)
    init = rbm.new_layer(6, 3, np.random.default_rng(11))
    assert np.array_equal(trained.w, init.w)
    assert np.array_equal(trained.a, init.a)
    assert np.array_equal(trained.b, init.b)


def test_cd1_deterministic_under_seed():
    rng = np.random.default_rng(5)
    data = rng.random((64, 8))
    a = rbm.cd1_train_layer(data, 4, epochs=3, learning_rate=0.1, seed=7)
    b = rbm.cd1_train_layer(data, 4, epochs=3, learning_rate=0.1, seed=7)
    assert np.array_equal(a.w, b.w) and np.array_equal(a.a, b.a)
    c = rbm.cd1_train_layer(data, 4, epochs=3, learning_rate=0.1, seed=8)
    assert not np.array_equal(a.w, c.w)


def test_cd1_raises_pattern_probability():
    patterns = np.array([[1.0, 1, 0, 0], [0, 0, 1, 1]])
    data = np.repeat(patterns, 40, axis=0)
    before = rbm.new_layer(4, 2, np.random.default_rng(21))
    after = rbm.cd1_train_layer(data, 2, epochs=60, learning_rate=0.1, seed=21)
    p_before = rbm.exhaustive_distribution(before).p_v
    p_after = rbm.exhaustive_distribution(after).p_v
    idx = [config_index(p) for p in patterns]
    assert p_after[idx].sum() > p_before[idx].sum()


def test_cd1_empty_guard():
    with pytest.raises(EmptyTrainingSetError):
        rbm.cd1_train_layer(np.zeros((0, 3)), 2, 1, 0.1, seed=0)


def _separable_toy(n=300, seed=6):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n).astype(bool)
    x = np.where(y[:, None], rng.uniform(0.8, 1.0, (n, 6)), rng.uniform(0.0, 0.2, (n, 6)))
    return x, y


def logistic_oracle_accuracy(x, y, iters=400):
    """Plain logistic regression on raw inputs (establishes separability)."""
    w = np.zeros(x.shape[1])
    c = 0.0
    for _ in range(iters):
        p = 1.0 / (1.0 + np.exp(-(x @ w + c)))
        g = p - y
        w -= 1.0 * (x.T @ g) / len(y)
        c -= 1.0 * g.mean()
    pred = (x @ w + c) >= 0
    return np.mean(pred == y)


def test_stack_reaches_oracle_accuracy_on_separable_toy():
    x, y = _separable_toy()
    assert logistic_oracle_accuracy(x, y) >= 0.95
    # the 300-row toy only sees 5 minibatches per epoch, so the pretraining
    # budget is scaled up to let CD-1 grow useful features
    stack = rbm.train_stack(x, y, hidden_sizes=(6,), epochs=60,
                            learning_rate=0.3, seed=1)
    p = rbm.classify(stack, x)
    verdicts = p[:, 0] >= 0.5
    assert np.mean(verdicts == y) >= 0.95


def test_stack_shape_and_epochs_zero():
    x, y = _separable_toy(80)
    stack = rbm.train_stack(x, y, hidden_sizes=(24, 16, 8), epochs=0, seed=2)
    assert stack.hidden_sizes() == [24, 16, 8]
    assert len(stack.layers) == 3
    p = rbm.classify(stack, x)
    assert p.shape == (80, 2)


def test_classify_outputs_sum_to_one_and_zero_head_is_half():
    x, y = _separable_toy(50, seed=8)
    stack = rbm.train_stack(x, y, hidden_sizes=(5, 3), epochs=2, seed=3)
    p = rbm.classify(stack, x)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)
    stack.head_w = np.zeros_like(stack.head_w)
    stack.head_c = 0.0
    p = rbm.classify(stack, x)
    assert np.allclose(p, 0.5)


def test_classify_monotone_in_head_weight():
    x, y = _separable_toy(30, seed=9)
    stack = rbm.train_stack(x, y, hidden_sizes=(4,), epochs=2, seed=4)
    p0 = rbm.classify(stack, x)[:, 0]
    stack.head_w[0] += 1.0   # top-layer activations are nonnegative
    p1 = rbm.classify(stack, x)[:, 0]
    assert (p1 >= p0 - 1e-12).all()


def test_stack_serialization_roundtrip():
    x, y = _separable_toy(60, seed=10)
    stack = rbm.train_stack(x, y, hidden_sizes=(5, 4), epochs=3, seed=5)
    text = rbm.stack_to_json(stack)
    loaded = rbm.stack_from_json(text)
    assert np.allclose(rbm.classify(stack, x), rbm.classify(loaded, x))


def test_stack_deserialization_validates_chain():
    x, y = _separable_toy(40, seed=11)
    stack = rbm.train_stack(x, y, hidden_sizes=(5, 4), epochs=1, seed=6)
    import json
    payload = json.loads(rbm.stack_to_json(stack))
    payload["layers"][1]["visible"] = 9
    payload["layers"][1]["w"] = [0.0] * (9 * 4)
    with pytest.raises(DimensionMismatchError):
        rbm.stack_from_json(json.dumps(payload))
