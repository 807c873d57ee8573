"""Discrete AdaBoost over shallow weighted classification trees."""

from __future__ import annotations

import numpy as np

from ..trees.cart import _as_matrix, grow_maximal_tree
from .model import BoostedModel

EPS_FLOOR = 1e-10


def adaboost_fit(X, y, n_learners=50, max_depth=2, min_node_size=1, criterion="gini"):
    """AdaBoost with ``alpha_b = ln((1 - eps_b) / eps_b)``.

    Labels must be -1 or +1. Weights start uniform, misclassified rows are
    multiplied by ``exp(alpha_b)`` and all weights are renormalised to sum to
    one. A learner with ``eps_b >= 0.5`` is discarded and boosting stops; a
    learner with ``eps_b = 0`` is kept (its ``eps`` floored at 1e-10) and
    boosting stops.
    """
    if n_learners < 1:
        raise ValueError("n_learners must be at least 1")
    X = _as_matrix(X)
    y = np.asarray(y)
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    n = y.size
    w = np.full(n, 1.0 / n)
    learners, alphas, log = [], [], []
    for b in range(n_learners):
        tree = grow_maximal_tree(X, y, w, task="classification", criterion=criterion,
                                 max_depth=max_depth, min_node_size=min_node_size, classes=np.array([-1, 1]))
        wrong = tree.predict(X) != y
        eps = float(np.sum(w[wrong]) / np.sum(w))
        if eps >= 0.5:
            break
        alpha = float(np.log((1.0 - max(eps, EPS_FLOOR)) / max(eps, EPS_FLOOR)))
        learners.append(tree)
        alphas.append(alpha)
        log.append((b + 1, eps))
        if eps == 0.0:
            break
        w = w * np.exp(alpha * wrong)
        w = w / w.sum()
    if not learners:
        raise ValueError("the first weak learner is no better than chance")
    return BoostedModel(kind="adaboost", loss=None, base_score=0.0, learners=tuple(learners),
                        coefficients=tuple(alphas), learning_rate=1.0, log=tuple(log),
                        extras={"max_depth": max_depth})
