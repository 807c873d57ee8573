"""Second-order tree boosting with exact greedy splits."""

from __future__ import annotations

import numpy as np
from scipy.special import logit

from .._rng import substream
from ..trees.cart import _as_matrix
from ..trees.tree import LEAF, Split, TreeBuilder
from .losses import CoxPartialLoss, get_loss
from .model import BoostedModel


def xgb_leaf_weight(G, H, reg_lambda):
    """Optimal leaf value ``w* = -G / (H + lambda)``."""
    denom = H + reg_lambda
    if not denom > 0:
        raise ValueError("H + lambda must be positive")
    return -G / denom


def xgb_split_gain(GL, HL, GR, HR, reg_lambda, gamma):
    """``1/2 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma``."""
    return 0.5 * (GL * GL / (HL + reg_lambda) + GR * GR / (HR + reg_lambda)
                  - (GL + GR) ** 2 / (HL + HR + reg_lambda)) - gamma


def structure_score(G, H, reg_lambda):
    return -0.5 * G * G / (H + reg_lambda)


def _best_xgb_split(X, g, h, features, reg_lambda, gamma, min_child_hessian):
    G, H = g.sum(), h.sum()
    best = None
    for f in features:
        x = X[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        valid = np.flatnonzero(xs[:-1] < xs[1:])
        if valid.size == 0:
            continue
        GL = np.cumsum(g[order])[valid]
        HL = np.cumsum(h[order])[valid]
        GR, HR = G - GL, H - HL
        ok = (HL >= min_child_hessian) & (HR >= min_child_hessian)
        if not ok.any():
            continue
        gain = np.where(ok, xgb_split_gain(GL, HL, GR, HR, reg_lambda, gamma), -np.inf)
        i = int(np.argmax(gain))
        if best is None or gain[i] > best[2] + 1e-12 * max(abs(best[2]), 1e-300):
            best = (f, 0.5 * (xs[valid[i]] + xs[valid[i] + 1]), float(gain[i]))
    return best


def grow_xgb_tree(X, g, h, reg_lambda=1.0, gamma=0.0, max_depth=6, min_child_hessian=1e-3,
                  learning_rate=1.0, features=None):
    """One boosting tree on gradients ``g`` and hessians ``h``.

    Every node is split at its highest-gain candidate down to ``max_depth``
    (subject to ``min_child_hessian`` in both children). Afterwards splits
    whose children are leaves and whose gain is not positive are removed,
    bottom-up, until none remain. Node values are ``learning_rate * w*``.
    """
    X = _as_matrix(X)
    p = X.shape[1]
    features = list(range(p)) if features is None else [int(f) for f in features]
    builder = TreeBuilder("regression", p)

    def grow(rows, depth):
        G, H = float(g[rows].sum()), float(h[rows].sum())
        node = builder.add(depth, [learning_rate * xgb_leaf_weight(G, H, reg_lambda)],
                           weight=H, size=float(rows.size), error=np.nan,
                           impurity=structure_score(G, H, reg_lambda))
        if depth >= max_depth or rows.size < 2:
            return node
        best = _best_xgb_split(X[rows], g[rows], h[rows], features, reg_lambda, gamma,
                               min_child_hessian)
        if best is None:
            return node
        f, thr, gain = best
        go_left = X[rows, f] <= thr
        left = grow(rows[go_left], depth + 1)
        right = grow(rows[~go_left], depth + 1)
        builder.set_split(node, Split(int(f), float(thr), gain), left, right)
        return node

    grow(np.arange(X.shape[0]), 0)
    tree = builder.build()
    while True:
        leafy = (tree.feature != LEAF)
        drop = [t for t in np.flatnonzero(leafy)
                if tree.feature[tree.left[t]] == LEAF and tree.feature[tree.right[t]] == LEAF
                and tree.gain[t] <= 0]
        if not drop:
            return tree
        tree = tree.subtree_collapsed(drop)


def _default_base_score(loss, y, w):
    if loss.link == "logit":
        w = np.ones_like(y, dtype=float) if w is None else w
        rate = np.sum(np.asarray(y) * w) / np.sum(w) if loss.name == "logistic" else \
            np.sum(y) / np.sum(w)
        rate = min(max(rate, 1e-300), 1 - 1e-16)
        return float(np.clip(logit(rate), -10.0, 10.0))
    if loss.name == "cox_partial":
        return 0.0
    w = np.ones(len(y)) if w is None else w
    return float(np.sum(w * y) / np.sum(w))


def xgboost_fit(X, y, weights=None, loss="exposure_binomial", n_rounds=100, learning_rate=0.1,
                reg_lambda=1.0, gamma=0.0, max_depth=6, subsample_rows=1.0, subsample_cols=1.0,
                base_score=None, min_child_hessian=1e-3, seed=0):
    """Boost second-order regression trees on raw scores.

    For ``exposure_binomial`` the targets are interval death flags and the
    weights initial exposures; rows with zero exposure are dropped. The
    default base score is the logit of ``sum(delta) / sum(ei)`` clamped to
    ``[-10, 10]`` (the mean target for squared loss). ``cox_partial`` takes
    ``y = (durations, events)``.

    Row and column subsamples are drawn per round from labelled streams of
    ``seed``; a ratio of 1 draws nothing.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be at least 1")
    loss = get_loss(loss)
    X = _as_matrix(X)
    n, p = X.shape
    if isinstance(loss, CoxPartialLoss):
        durations, events = (np.asarray(a) for a in y)
        w = None
        target = (durations.astype(float), events.astype(int))
    else:
        target = np.asarray(y, dtype=float)
        w = None if weights is None else np.asarray(weights, dtype=float)
        if loss.link == "logit":
            if not np.all(np.isin(target, (0.0, 1.0))):
                raise ValueError("binomial targets must be 0 or 1")
            if w is not None:
                if np.any(w < 0) or np.any(w > 1 + 1e-12):
                    raise ValueError("exposures must lie in [0, 1]")
                keep = w > 0
                X, target, w = X[keep], target[keep], w[keep]
                n = X.shape[0]
    if base_score is None:
        base_score = _default_base_score(loss, target, w)
    raw = np.full(n, float(base_score))
    learners, log = [], [(0, loss.value(target, raw, w))]
    n_sub = int(round(subsample_rows * n))
    m_sub = int(round(subsample_cols * p))
    if not (1 <= n_sub <= n and 1 <= m_sub <= p):
        raise ValueError("subsampling ratios leave no rows or columns")
    for b in range(n_rounds):
        g = loss.gradient(target, raw, w)
        h = loss.hessian(target, raw, w)
        rows = np.arange(n)
        if n_sub < n:
            rows = np.sort(substream(seed, "xgb", "rows", b).choice(n, n_sub, replace=False))
        features = None
        if m_sub < p:
            features = np.sort(substream(seed, "xgb", "cols", b).choice(p, m_sub, replace=False))
        tree = grow_xgb_tree(X[rows], g[rows], h[rows], reg_lambda, gamma, max_depth,
                             min_child_hessian, learning_rate, features)
        raw = raw + tree.predict_value(X)[:, 0]
        learners.append(tree)
        log.append((b + 1, loss.value(target, raw, w)))
    params = {"reg_lambda": reg_lambda, "gamma": gamma, "max_depth": max_depth,
              "subsample_rows": subsample_rows, "subsample_cols": subsample_cols,
              "min_child_hessian": min_child_hessian, "seed": seed}
    return BoostedModel(kind="xgb", loss=loss, base_score=float(base_score), learners=tuple(learners),
                        coefficients=tuple(1.0 for _ in learners), learning_rate=learning_rate,
                        log=tuple(log), extras=params)


def xgboost_fit_pseudo(pseudo, encoding=None, weight_column="ei", **config):
    """Fit an exposure-binomial booster on a pseudo table's encoded covariates.

    ``weight_column`` selects ``ei`` (initial exposure) or ``ec``.
    Returns ``(model, encoded_matrix)``.
    """
    from ..data import one_hot_encode

    enc = one_hot_encode(pseudo, encoding)
    weights = getattr(pseudo, weight_column)
    config.setdefault("loss", "exposure_binomial")
    return xgboost_fit(enc.values, pseudo.delta, weights, **config), enc
