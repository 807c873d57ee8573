"""Surrogate divisions and surrogate-based CART variable importance."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .cart import _as_matrix, split_gain
from .tree import LEAF


@dataclass(frozen=True)
class Surrogate:
    """Division of a node on ``feature``.

    Rows with ``x <= threshold`` go left unless ``reversed``. A threshold of
    ``-inf`` sends everyone right, ``+inf`` everyone left.
    """

    feature: int
    threshold: float
    reversed: bool
    agreement: float


def _node_targets(tree, y):
    if tree.task == "classification":
        return np.searchsorted(tree.classes, np.asarray(y))
    return np.zeros(len(y), dtype=int)


def surrogate_split(tree, node, X, y, feature, weights=None, members=None):
    """Best division on ``feature`` mimicking the optimal split at ``node``.

    Agreement is ``sum_k p(k|t) [N_k(L n L') + N_k(R n R')] / N_k(t)`` where
    ``L, R`` are the optimal split's children, ``L', R'`` the candidate's,
    and classes with ``N_k(t) = 0`` contribute nothing. Regression trees use
    a single class. Candidates are every midpoint between distinct values in
    both orientations plus the two trivial divisions; ties go to the normal
    orientation and then the lowest threshold.
    """
    if tree.feature[node] == LEAF:
        raise ValueError("surrogates need an internal node")
    X = _as_matrix(X)
    if members is None:
        members = tree.node_members(X)[node]
    w = np.ones(X.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    k = _node_targets(tree, y)[members]
    wm = w[members]
    K = int(k.max()) + 1 if k.size else 1
    x_star = X[members, tree.feature[node]]
    in_left = x_star <= tree.threshold[node]

    Nk = np.bincount(k, weights=wm, minlength=K)
    if not Nk.sum() > 0:
        # node unreached by these rows: no agreement can be measured
        return Surrogate(int(feature), np.inf, False, 0.0)
    pk = Nk / Nk.sum()
    coef = np.where(Nk > 0, pk / np.where(Nk > 0, Nk, 1.0), 0.0)
    # per-row contribution of agreeing when on the left / on the right
    a_left = coef[k] * wm * in_left
    a_right = coef[k] * wm * ~in_left

    x = X[members, feature]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cum_left = np.concatenate(([0.0], np.cumsum(a_left[order])))
    cum_right = np.concatenate(([0.0], np.cumsum(a_right[order])))
    # cut after position i: first i sorted rows go left (i = 0 is all-right)
    cuts = np.concatenate(([0], np.flatnonzero(xs[:-1] < xs[1:]) + 1, [xs.size]))
    agree = cum_left[cuts] + (cum_right[-1] - cum_right[cuts])
    thresholds = np.empty(cuts.size)
    thresholds[0], thresholds[-1] = -np.inf, np.inf
    inner = cuts[1:-1]
    thresholds[1:-1] = 0.5 * (xs[inner - 1] + xs[inner])
    if xs.size and xs[0] == xs[-1]:
        # constant feature: only the trivial all-left division
        return Surrogate(int(feature), np.inf, False, float(agree[-1]))
    reverse = 1.0 - agree
    best_fwd = int(np.argmax(agree))
    best_rev = int(np.argmax(reverse))
    if reverse[best_rev] > agree[best_fwd] + 1e-12:
        return Surrogate(int(feature), float(thresholds[best_rev]), True, float(reverse[best_rev]))
    return Surrogate(int(feature), float(thresholds[best_fwd]), False, float(agree[best_fwd]))


def surrogate_gain(tree, node, X, y, surrogate, weights=None, size_weights=None, members=None,
                   criterion="gini"):
    """Impurity decrease achieved at ``node`` by a surrogate division."""
    X = _as_matrix(X)
    if members is None:
        members = tree.node_members(X)[node]
    if not np.isfinite(surrogate.threshold):
        return 0.0
    w = None if weights is None else np.asarray(weights, dtype=float)[members]
    sw = None if size_weights is None else np.asarray(size_weights, dtype=float)[members]
    y_node = np.asarray(y)[members]
    if tree.task == "classification":
        y_node = np.searchsorted(tree.classes, y_node)
        K = tree.classes.size
    else:
        K = None
    x = X[members, surrogate.feature]
    # orientation does not change the impurity decrease
    return max(0.0, split_gain(x, y_node, surrogate.threshold, w, sw, tree.task, criterion, K))


def cart_variable_importance(tree, X, y, weights=None, size_weights=None, criterion="gini",
                             feature_names=None):
    """``I(x_m) = sum_t p(t) dImp(d~_m(t), t)`` rescaled so the largest is 100.

    At each internal node the split feature scores the node's own gain and
    every other feature the gain of its surrogate division. Each node counts
    in proportion to its share ``p(t)`` of the root size, so the many small
    nodes of a maximal tree do not swamp the top splits. A single-leaf tree
    scores zero everywhere.

    Returns a dict keyed by feature name (or index).
    """
    X = _as_matrix(X)
    p = X.shape[1]
    raw = np.zeros(p)
    members = tree.node_members(X)
    for t in tree.internal_nodes():
        share = tree.size[t] / tree.size[0]
        for m in range(p):
            if m == tree.feature[t]:
                raw[m] += share * tree.gain[t]
                continue
            s = surrogate_split(tree, t, X, y, m, weights, members[t])
            raw[m] += share * surrogate_gain(tree, t, X, y, s, weights, size_weights, members[t], criterion)
    top = raw.max()
    scaled = 100.0 * raw / top if top > 0 else np.zeros(p)
    names = list(range(p)) if feature_names is None else list(feature_names)
    return dict(zip(names, scaled.tolist()))


def write_importance_csv(importance, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "importance"])
        for name, value in importance.items():
            writer.writerow([name, repr(float(value))])
