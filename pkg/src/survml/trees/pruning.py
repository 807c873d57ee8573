"""Weak-link (cost-complexity) pruning and subtree selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import LEAF

TOL = 1e-12


@dataclass(frozen=True)
class PruneSequence:
    alphas: tuple
    trees: tuple

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(zip(self.alphas, self.trees))


def _branch_stats(tree):
    """``R(T(t))`` and leaf count ``|T(t)|`` for every node, bottom-up."""
    risk = tree.error.astype(float).copy()
    leaves = np.ones(tree.n_nodes, dtype=int)
    for t in range(tree.n_nodes - 1, -1, -1):
        if tree.feature[t] != LEAF:
            risk[t] = risk[tree.left[t]] + risk[tree.right[t]]
            leaves[t] = leaves[tree.left[t]] + leaves[tree.right[t]]
    return risk, leaves


def weak_link_scores(tree):
    """``g(t) = (R(t) - R(T(t))) / (|T(t)| - 1)`` for internal nodes, ``inf`` at leaves."""
    risk, leaves = _branch_stats(tree)
    g = np.full(tree.n_nodes, np.inf)
    internal = tree.feature != LEAF
    g[internal] = (tree.error[internal] - risk[internal]) / (leaves[internal] - 1)
    return g


def _collapse_below(tree, threshold):
    """Repeatedly collapse every node whose weak-link score is at most ``threshold``."""
    while tree.n_leaves > 1:
        g = weak_link_scores(tree)
        hit = np.flatnonzero(g <= threshold)
        if hit.size == 0:
            break
        tree = tree.subtree_collapsed(hit)
    return tree


def prune_sequence(tree):
    """Nested subtrees ``T_0 > T_1 > ... > root`` with strictly increasing alphas.

    ``T_0`` is the tree with every branch that does not lower the risk
    removed (``alpha_0 = 0``). Each later step finds the smallest weak-link
    score, sets ``alpha_k`` to it and prunes every node attaining it,
    repeating until no score at or below ``alpha_k`` remains.
    """
    current = _collapse_below(tree, TOL * max(tree.error[0], 1e-300))
    alphas, trees = [0.0], [current]
    while current.n_leaves > 1:
        alpha = float(np.min(weak_link_scores(current)))
        current = _collapse_below(current, alpha + TOL * max(abs(alpha), 1e-300))
        if alpha <= alphas[-1]:
            # numerical ties with the previous level merge into it
            trees[-1] = current
            continue
        alphas.append(alpha)
        trees.append(current)
    return PruneSequence(tuple(alphas), tuple(trees))


def penalized_risk(tree, alpha):
    """``R_alpha(T) = R(T) + alpha |T|``."""
    return tree.risk() + alpha * tree.n_leaves


def holdout_error(tree, X, y, weights=None):
    """Weighted misclassification rate, or weighted mean squared error."""
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    pred = tree.predict(X)
    if tree.task == "classification":
        return float(np.sum(w * (pred != np.asarray(y))) / w.sum())
    return float(np.sum(w * (pred - np.asarray(y, dtype=float)) ** 2) / w.sum())


def select_subtree(seq, method="penalized_train", X=None, y=None, weights=None):
    """Pick a tree from a prune sequence.

    ``penalized_train`` minimises ``R_alpha_k(T_k)`` on the training data;
    ``holdout`` minimises the unpenalized error on ``(X, y)``. Ties go to the
    smallest tree.
    """
    if method == "penalized_train":
        scores = [penalized_risk(t, a) for a, t in seq]
    elif method == "holdout":
        if X is None or y is None:
            raise ValueError("holdout selection needs X and y")
        scores = [holdout_error(t, X, y, weights) for _, t in seq]
    else:
        raise ValueError(f"unknown selection method {method!r}")
    scores = np.asarray(scores)
    best = scores.min()
    hits = np.flatnonzero(scores <= best + TOL * max(abs(best), 1e-300))
    return seq.trees[hits[-1]]
