import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from survml.trees import (LEAF, Tree, best_split, entropy, gini, grow_maximal_tree, impurity,
                          split_gain)

# sex (male = 1), age, sibsp, survived
TITANIC_LIKE = np.array([
    [0, 14, 0, 1], [0, 22, 1, 1], [0, 27, 0, 1], [0, 33, 1, 1], [0, 38, 0, 1], [0, 45, 2, 1],
    [0, 51, 1, 1], [0, 58, 0, 1], [1, 11, 0, 0], [1, 24, 1, 0], [1, 30, 0, 0], [1, 36, 2, 0],
    [1, 41, 1, 0], [1, 47, 0, 0], [1, 55, 1, 0], [1, 62, 0, 0], [1, 3, 4, 0], [1, 5, 2, 1],
    [1, 7, 3, 0], [1, 8, 0, 1]], dtype=float)

# ten lives of one node: five deaths, two survivors, three censored
DELTA10 = np.array([1, 1, 1, 1, 1, 0, 0, 0, 0, 0])
EI10 = np.array([1, 1, 1, 1, 1, 1, 1, 0.2, 0.8, 0.5])
GROUP10 = np.array([0, 0, 0, 0, 0, 1, 1, 2, 2, 2])


def ten_lives_features():
    """Columns isolating the dead, the survivors and the censored lives."""
    return np.column_stack([GROUP10 > 0, GROUP10 == 1, GROUP10 == 2]).astype(float)


def exhaustive_best(X, y, w=None, sw=None, task="classification"):
    best = (-np.inf, None, None)
    for f in range(X.shape[1]):
        v = np.unique(X[:, f])
        for thr in (v[:-1] + v[1:]) / 2:
            g = split_gain(X[:, f], y, thr, w, sw, task)
            if g > best[0] + 1e-12:
                best = (g, f, thr)
    return best


def test_impurity_basics():
    assert gini([5, 5]) == pytest.approx(0.5)
    assert entropy([5, 5]) == pytest.approx(np.log(2))
    assert gini([3, 0]) == 0 and entropy([0, 7]) == 0
    q = 5 / 8.5
    assert gini([5, 3.5]) == pytest.approx(2 * q * (1 - q), abs=1e-15)
    assert gini([5, 3.5]) == pytest.approx(0.4844, abs=1e-4)
    with pytest.raises(ValueError):
        impurity([0, 0])


@pytest.mark.parametrize("K", [2, 3, 4])
def test_impurity_axioms_on_grid(K):
    grid = [np.array(c) / 6 for c in itertools.product(range(7), repeat=K) if sum(c) == 6]
    for kind in ("gini", "entropy"):
        vals = np.array([impurity(p, kind) for p in grid])
        uniform = impurity(np.ones(K) / K, kind)
        assert np.all(vals <= uniform + 1e-12)
        zeros = [tuple(p) for p, v in zip(grid, vals) if v <= 1e-15]
        assert sorted(zeros) == sorted(tuple(r) for r in np.eye(K))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=5).filter(lambda c: sum(c) > 0.1),
       st.randoms(use_true_random=False))
def test_impurity_permutation_symmetric(counts, rnd):
    perm = list(counts)
    rnd.shuffle(perm)
    for kind in ("gini", "entropy"):
        assert impurity(perm, kind) == pytest.approx(impurity(counts, kind), rel=1e-12, abs=1e-15)


def test_weighted_gini_worked_example():
    X = ten_lives_features()
    gains = [split_gain(X[:, f], DELTA10, 0.5, EI10, np.ones(10)) for f in range(3)]
    assert gains[0] == pytest.approx(0.48, abs=0.01)
    assert gains[1] == pytest.approx(0.20, abs=0.01)
    assert gains[2] == pytest.approx(0.19, abs=0.01)
    split = best_split(X, DELTA10, EI10, size_weights=np.ones(10))
    assert split.feature == 0 and split.gain == pytest.approx(gains[0], abs=1e-12)


def test_mixing_dead_with_censored_beats_mixing_with_survivors():
    X = ten_lives_features()
    weighted = [split_gain(X[:, f], DELTA10, 0.5, EI10, np.ones(10)) for f in (1, 2)]
    assert weighted[0] > weighted[1]


def test_constant_target_has_no_split():
    X = np.random.default_rng(0).normal(size=(30, 3))
    assert best_split(X, np.zeros(30, int)) is None
    assert best_split(X, np.full(30, 2.5), task="regression") is None


def test_xor_root_gain_is_small():
    rng = np.random.default_rng(0)
    X = rng.random((1000, 2))
    y = ((X[:, 0] < 0.5) ^ (X[:, 1] < 0.5)).astype(int)
    split = best_split(X, y)
    oracle = exhaustive_best(X, y)
    assert split.gain == pytest.approx(oracle[0], abs=1e-12)
    assert split.gain < 0.02


def test_best_split_matches_exhaustive_scan():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n, p = rng.integers(5, 40), rng.integers(1, 4)
        X = rng.integers(0, 6, (n, p)).astype(float)
        y = rng.integers(0, 3, n)
        w = rng.uniform(0.1, 1.0, n)
        split = best_split(X, y, w)
        g, f, thr = exhaustive_best(X, y, w)
        if split is None:
            assert not g > 1e-12
            continue
        assert split.gain == pytest.approx(g, abs=1e-12)
        assert split.gain == pytest.approx(split_gain(X[:, split.feature], y, split.threshold, w), abs=1e-12)
        assert (split.feature, split.threshold) == (f, thr)


def test_regression_split_matches_scan():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 3))
    y = np.where(X[:, 1] > 0.2, 3.0, -1.0) + 0.1 * rng.normal(size=60)
    split = best_split(X, y, task="regression")
    g, f, thr = exhaustive_best(X, y, task="regression")
    assert split.feature == f == 1 and split.threshold == thr and split.gain == pytest.approx(g, abs=1e-12)


def test_three_split_structure():
    X, y = TITANIC_LIKE[:, :3], TITANIC_LIKE[:, 3].astype(int)
    g, f, thr = exhaustive_best(X, y)
    assert (f, thr) == (0, 0.5)
    tree = grow_maximal_tree(X, y, min_node_size=3)
    root = 0
    assert tree.feature[root] == 0
    male = tree.right[root]
    assert tree.is_leaf(tree.left[root])
    assert (tree.feature[male], tree.threshold[male]) == (1, 9.5)
    boys = tree.left[male]
    assert (tree.feature[boys], tree.threshold[boys]) == (2, 2.5)
    assert tree.n_leaves == 4
    male_rows = X[:, 0] == 1
    assert exhaustive_best(X[male_rows], y[male_rows])[1:] == (1, 9.5)
    np.testing.assert_array_equal(tree.predict(X), y)


def test_single_row_and_large_min_node_size():
    t = grow_maximal_tree(np.array([[1.0, 2.0]]), np.array([1]))
    assert t.n_nodes == 1
    X = np.random.default_rng(0).normal(size=(12, 2))
    y = (X[:, 0] > 0).astype(int)
    assert grow_maximal_tree(X, y, min_node_size=12).n_nodes == 1


def test_majority_tie_goes_to_lowest_class():
    t = grow_maximal_tree(np.zeros((4, 1)), np.array([3, 1, 3, 1]))
    assert t.predict(np.zeros((1, 1)))[0] == 1


def _assert_tree_invariants(t):
    for node in range(t.n_nodes):
        if t.feature[node] != LEAF:
            assert t.left[node] > node and t.right[node] > node
    risk = t.error.copy()
    for node in range(t.n_nodes - 1, -1, -1):
        if t.feature[node] != LEAF:
            risk[node] = risk[t.left[node]] + risk[t.right[node]]
            assert risk[node] <= t.error[node] + 1e-12
            assert t.gain[node] >= 0
    if t.task == "classification":
        np.testing.assert_allclose(t.value.sum(axis=1), 1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["gini", "entropy"]))
def test_grown_tree_invariants(seed, criterion):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 5, (50, 3)).astype(float)
    y = rng.integers(0, 2, 50)
    t = grow_maximal_tree(X, y, rng.uniform(0.2, 1, 50), criterion=criterion, min_node_size=2)
    _assert_tree_invariants(t)
    np.testing.assert_array_equal(t.predict(X), t.predict(X))


def test_tree_json_round_trip():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(80, 3))
    y = (X[:, 0] + X[:, 2] > 0).astype(int)
    t = grow_maximal_tree(X, y)
    again = Tree.from_dict(json.loads(json.dumps(t.to_dict())))
    np.testing.assert_array_equal(again.predict(X), t.predict(X))
    np.testing.assert_array_equal(again.predict_proba(X), t.predict_proba(X))
    root = t.to_dict()["nodes"][0]
    assert {"feature", "threshold", "left", "right", "value"} <= set(root)
