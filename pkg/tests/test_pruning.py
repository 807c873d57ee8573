import numpy as np
import pytest

from survml.trees import LEAF, grow_maximal_tree, penalized_risk, prune_sequence, select_subtree
from survml.trees.pruning import PruneSequence


def leaf_walk_risk(tree, alpha):
    """R(T) + alpha |T| by walking the tree from the root."""
    total, leaves, stack = 0.0, 0, [0]
    while stack:
        node = stack.pop()
        if tree.feature[node] == LEAF:
            total += tree.error[node]
            leaves += 1
        else:
            stack += [tree.left[node], tree.right[node]]
    return total + alpha * leaves


def random_tree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(40, 200))
    X = rng.normal(size=(n, 3))
    y = ((X[:, 0] + 0.8 * rng.normal(size=n)) > 0).astype(int)
    return grow_maximal_tree(X, y, min_node_size=int(rng.integers(1, 6))), X, y


@pytest.mark.parametrize("seed", range(30))
def test_prune_sequence_invariants(seed):
    tree, *_ = random_tree(seed)
    seq = prune_sequence(tree)
    alphas = np.array(seq.alphas)
    sizes = [t.n_leaves for t in seq.trees]
    assert alphas[0] == 0.0 and np.all(np.diff(alphas) > 0)
    assert all(a > b for a, b in zip(sizes, sizes[1:]))
    assert seq.trees[-1].n_nodes == 1
    for a, t in seq:
        assert penalized_risk(t, a) == pytest.approx(leaf_walk_risk(t, a), abs=1e-12)
    for bigger, smaller in zip(seq.trees, seq.trees[1:]):
        assert set(smaller.origin.tolist()) <= set(bigger.origin.tolist())


def test_single_useful_split():
    X = np.r_[np.zeros(10), np.ones(6)][:, None]
    y = np.r_[np.zeros(10, int), np.ones(6, int)]
    tree = grow_maximal_tree(X, y)
    seq = prune_sequence(tree)
    assert len(seq) == 2 and seq.trees[0].n_leaves == 2
    assert seq.alphas[1] == pytest.approx(tree.error[0] - 0.0, abs=1e-15)
    assert seq.alphas[1] == pytest.approx(6 / 16)


def test_zero_gain_branches_removed_at_alpha_zero():
    # the second split lowers impurity but leaves the misclassification risk unchanged
    X = np.array([[0, 0], [0, 1], [0, 1], [1, 0], [1, 0], [1, 0], [1, 1], [1, 1.0]])
    y = np.array([0, 0, 1, 1, 1, 1, 1, 0])
    tree = grow_maximal_tree(X, y, min_node_size=1)
    seq = prune_sequence(tree)
    assert np.all(np.diff(seq.alphas) > 0)
    risk0 = seq.trees[0]
    assert risk0.risk() == pytest.approx(tree.risk())


def test_single_leaf_sequence():
    tree = grow_maximal_tree(np.zeros((5, 1)), np.zeros(5, int))
    seq = prune_sequence(tree)
    assert len(seq) == 1 and seq.alphas == (0.0,)
    assert select_subtree(seq) is seq.trees[0]


def test_select_penalized_train_is_argmin():
    tree, X, y = random_tree(99)
    seq = prune_sequence(tree)
    chosen = select_subtree(seq, "penalized_train")
    scores = [penalized_risk(t, a) for a, t in seq]
    assert penalized_risk(chosen, seq.alphas[seq.trees.index(chosen)]) == pytest.approx(min(scores))


def test_select_ties_go_to_smallest():
    X = np.r_[np.zeros(10), np.ones(6)][:, None]
    y = np.r_[np.zeros(10, int), np.ones(6, int)]
    full, root = prune_sequence(grow_maximal_tree(X, y)).trees
    alpha = 6 / 16  # R(full) + 2 alpha = R(root) + alpha
    tied = PruneSequence((alpha, alpha), (full, root))
    assert penalized_risk(full, alpha) == pytest.approx(penalized_risk(root, alpha))
    assert select_subtree(tied) is root


def test_bad_method():
    tree, *_ = random_tree(0)
    with pytest.raises(ValueError):
        select_subtree(prune_sequence(tree), "unknown")
    with pytest.raises(ValueError):
        select_subtree(prune_sequence(tree), "holdout")


def test_pure_noise_holdout_returns_root():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(200, 3))
        y = (rng.random(200) < 0.15).astype(int)
        Xh = rng.normal(size=(200, 3))
        yh = (rng.random(200) < 0.15).astype(int)
        seq = prune_sequence(grow_maximal_tree(X, y))
        hits += select_subtree(seq, "holdout", Xh, yh).n_nodes == 1
    assert hits / 100 > 0.9
