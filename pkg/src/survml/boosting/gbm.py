"""First-order gradient boosting of regression trees."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from ..trees.cart import _as_matrix, grow_maximal_tree
from .losses import HuberLoss, get_loss
from .model import BoostedModel

GBM_LOSSES = ("squared", "absolute", "huber")


def _huber_delta(residuals, q):
    return float(np.quantile(np.abs(residuals), q))


def _initial_constant(loss, y, huber_quantile):
    if loss.name == "squared":
        return float(np.mean(y))
    if loss.name == "absolute":
        return float(np.median(y))
    # Huber: alternate the quantile scale and the minimising constant
    c = float(np.median(y))
    for _ in range(100):
        loss.delta = max(_huber_delta(y - c, huber_quantile), 1e-12)
        new = float(minimize_scalar(lambda t: loss.value(y, np.full(y.size, t)),
                                    bracket=(y.min(), y.max())).x)
        if abs(new - c) <= 1e-12 * max(1.0, abs(c)):
            c = new
            break
        c = new
    return c


def gbm_fit(X, y, loss="squared", n_stages=100, learning_rate=0.1, max_depth=3, min_node_size=5,
            huber_quantile=0.9, line_search=True):
    """Gradient boosting with a line-searched coefficient per stage.

    Each stage fits a regression tree to the pseudo-residuals ``-dJ/df``,
    chooses ``theta`` minimising ``J(f + theta * tree)`` and adds
    ``learning_rate * theta * tree``. For the Huber loss the threshold is
    re-set every stage to the ``huber_quantile`` quantile of the absolute
    residuals; the thresholds used are kept in ``extras["huber_deltas"]``.
    """
    if loss not in GBM_LOSSES:
        raise ValueError(f"unknown loss {loss!r}; expected one of {GBM_LOSSES}")
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float)
    L = HuberLoss(quantile=huber_quantile) if loss == "huber" else get_loss(loss)
    f0 = _initial_constant(L, y, huber_quantile)
    raw = np.full(y.size, f0)
    learners, coefs, deltas = [], [], []
    log = [(0, L.value(y, raw))]
    for m in range(n_stages):
        if loss == "huber":
            L.delta = max(_huber_delta(y - raw, huber_quantile), 1e-12)
            deltas.append(L.delta)
        residual = -L.gradient(y, raw)
        tree = grow_maximal_tree(X, residual, task="regression", max_depth=max_depth,
                                 min_node_size=min_node_size)
        out = tree.predict_value(X)[:, 0]
        if not line_search:
            theta = 1.0
        elif loss == "squared":
            denom = float(out @ out)
            theta = float(residual @ out) / denom if denom > 0 else 0.0
        else:
            theta = float(minimize_scalar(lambda t: L.value(y, raw + t * out)).x)
        raw = raw + learning_rate * theta * out
        learners.append(tree)
        coefs.append(learning_rate * theta)
        log.append((m + 1, L.value(y, raw)))
    extras = {"max_depth": max_depth, "min_node_size": min_node_size}
    if loss == "huber":
        extras["huber_deltas"] = deltas
    return BoostedModel(kind="gbm", loss=L, base_score=f0, learners=tuple(learners),
                        coefficients=tuple(coefs), learning_rate=learning_rate, log=tuple(log),
                        extras=extras)
