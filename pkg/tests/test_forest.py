import numpy as np
import pytest

from sentry_bench import forest
from sentry_bench.errors import DimensionMismatchError, EmptyTrainingSetError


def stump_oracle(x, y):
    """Exhaustive one-split search; returns training accuracy of the best stump."""
    n, d = x.shape
    best = max(np.mean(y), np.mean(1 - y))  # constant predictor baseline
    for f in range(d):
        for t in np.unique(x[:, f]):
            left = x[:, f] < t
            for lo, hi in ((0, 1), (1, 0)):
                pred = np.where(left, lo, hi)
                best = max(best, float(np.mean(pred == y)))
    return best


def test_perfect_single_feature_matches_stump_oracle():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, size=(200, 1)).astype(float)
    y = x[:, 0].astype(int)  # label equals the feature
    assert stump_oracle(x, y) == 1.0
    f = forest.train_forest(x, y, tree_count=5, features_per_split=1, seed=1)
    verdicts, _ = forest.forest_classify(f, x)
    assert np.mean(verdicts.astype(int) == y) == 1.0


def test_single_tree_forest_equals_its_tree():
    rng = np.random.default_rng(2)
    x = rng.random((80, 4))
    y = (x[:, 1] > 0.5).astype(int)
    f = forest.train_forest(x, y, tree_count=1, features_per_split=2, seed=3)
    probe = rng.random((50, 4))
    verdicts, share = forest.forest_classify(f, probe)
    tree_pred = f.trees[0].predict(probe)
    assert np.array_equal(verdicts, tree_pred.astype(bool))
    assert set(np.unique(share)) <= {0.0, 1.0}


def test_same_seed_same_forest():
    rng = np.random.default_rng(4)
    x = rng.random((120, 6))
    y = (x[:, 0] + x[:, 3] > 1.0).astype(int)
    probe = rng.random((200, 6))
    a = forest.train_forest(x, y, 7, 2, seed=42)
    b = forest.train_forest(x, y, 7, 2, seed=42)
    assert np.array_equal(forest.forest_votes(a, probe), forest.forest_votes(b, probe))
    c = forest.train_forest(x, y, 7, 2, seed=43)
    assert not np.array_equal(
        forest.forest_votes(a, probe), forest.forest_votes(c, probe)
    )


def test_vote_share_bounds_and_tie_rule():
    rng = np.random.default_rng(5)
    x = rng.random((60, 3))
    y = rng.integers(0, 2, size=60)
    f = forest.train_forest(x, y, 4, 2, seed=0)
    probe = rng.random((100, 3))
    verdicts, share = forest.forest_votes(f, probe), None
    share = forest.forest_votes(f, probe)
    assert (share >= 0).all() and (share <= 1).all()
    v, s = forest.forest_classify(f, probe)
    assert np.array_equal(v, s >= 0.5)  # exact tie (0.5) counts intrusive


def test_majority_vote_equals_mode_of_trees():
    rng = np.random.default_rng(6)
    x = rng.random((100, 5))
    y = (x[:, 2] > 0.4).astype(int)
    f = forest.train_forest(x, y, 9, 2, seed=7)
    probe = rng.random((40, 5))
    per_tree = np.stack([t.predict(probe) for t in f.trees])
    mode = per_tree.sum(axis=0) / f.tree_count
    assert np.allclose(forest.forest_votes(f, probe), mode)


def test_all_votes_intrusive():
    x = np.array([[0.0], [1.0]])
    y = np.array([1, 1])  # all training rows intrusive
    f = forest.train_forest(x, y, 5, 1, seed=0)
    v, share = forest.forest_classify(f, np.array([[0.3]]))
    assert v[0] and share[0] == 1.0


def test_input_validation():
    with pytest.raises(EmptyTrainingSetError):
        forest.train_forest(np.zeros((0, 3)), np.zeros(0), 3, 1, seed=0)
    x = np.random.default_rng(0).random((10, 3))
    y = np.zeros(10, dtype=int)
    with pytest.raises(ValueError):
        forest.train_forest(x, y, 0, 1, seed=0)
    with pytest.raises(ValueError):
        forest.train_forest(x, y, 3, 9, seed=0)
    f = forest.train_forest(x, y, 3, 2, seed=0)
    with pytest.raises(DimensionMismatchError):
        forest.forest_classify(f, np.zeros((2, 5)))


def test_forest_learns_noisy_separable_data():
    rng = np.random.default_rng(8)
    n = 400
    x = rng.random((n, 8))
    y = ((x[:, 0] > 0.5) | (x[:, 4] > 0.8)).astype(int)
    f = forest.train_forest(x, y, 15, 3, seed=9)
    x_test = rng.random((400, 8))
    y_test = ((x_test[:, 0] > 0.5) | (x_test[:, 4] > 0.8)).astype(int)
    v, _ = forest.forest_classify(f, x_test)
    assert np.mean(v.astype(int) == y_test) > 0.9
