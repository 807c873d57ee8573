"""Survival trees split by the two-sample log-rank statistic."""

from __future__ import annotations

import numpy as np

from ..estimators import nelson_aalen
from .cart import FeatureSampler, _as_matrix
from .tree import Split, TreeBuilder


def _logrank_sweep(x, durations, events, pooled_hazard, min_events):
    """Log-rank ``X2`` for every threshold on one feature.

    The expected deaths of a child are ``E = sum_tau n_child(tau) d(tau) / n(tau)``,
    which equals the sum of the pooled Nelson-Aalen hazard ``H(t_r)`` over
    the child's members, so a cumulative sum over sorted rows gives every
    candidate at once.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    valid = np.flatnonzero(xs[:-1] < xs[1:])
    if valid.size == 0:
        return np.empty(0), np.empty(0)
    h = pooled_hazard[order]
    e = events[order].astype(float)
    cum_e, cum_h = np.cumsum(e), np.cumsum(h)
    O_L, E_L = cum_e[valid], cum_h[valid]
    O_R, E_R = cum_e[-1] - O_L, cum_h[-1] - E_L
    ok = (O_L >= min_events) & (O_R >= min_events) & (E_L > 0) & (E_R > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        x2 = (O_L - E_L) ** 2 / E_L + (O_R - E_R) ** 2 / E_R
    x2 = np.where(ok, x2, -np.inf)
    return 0.5 * (xs[valid] + xs[valid + 1]), x2


def best_logrank_split(X, durations, events, min_events_per_leaf=5, feature_subset=None):
    """Split maximising the log-rank statistic, or ``None``."""
    X = _as_matrix(X)
    if events.sum() == 0:
        return None
    na = nelson_aalen(durations, events)
    pooled = na(durations)
    features = range(X.shape[1]) if feature_subset is None else sorted(int(f) for f in feature_subset)
    best = None
    for f in features:
        thr, x2 = _logrank_sweep(X[:, f], durations, events, pooled, min_events_per_leaf)
        if thr.size == 0:
            continue
        i = int(np.argmax(x2))
        if np.isfinite(x2[i]) and (best is None or x2[i] > best.gain * (1 + 1e-12) + 1e-15):
            best = Split(int(f), float(thr[i]), float(x2[i]))
    return best


def grow_survival_tree(X, durations, events, min_events_per_leaf=5, min_logrank=3.84, max_depth=30,
                       max_features=None, rng=None):
    """Grow a survival tree whose leaves hold member Nelson-Aalen curves.

    A node is split at the feature and threshold maximising the log-rank
    statistic between its children, provided each child keeps at least
    ``min_events_per_leaf`` deaths and the statistic reaches ``min_logrank``.
    """
    X = _as_matrix(X)
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events).astype(int)
    if events.sum() == 0:
        raise ValueError("survival tree needs at least one event")
    if events.sum() < min_events_per_leaf:
        raise ValueError("fewer events at the root than min_events_per_leaf")
    p = X.shape[1]
    sampler = None
    if max_features is not None:
        sampler = FeatureSampler(p, int(max_features), rng if rng is not None else np.random.default_rng(0))
    builder = TreeBuilder("survival", p)

    def grow(rows, depth):
        curve = nelson_aalen(durations[rows], events[rows])
        node = builder.add(depth, [float(events[rows].sum())], weight=float(rows.size),
                           size=float(rows.size), error=np.nan, curve=curve)
        if depth >= max_depth or events[rows].sum() < 2 * min_events_per_leaf:
            return node
        split = best_logrank_split(X[rows], durations[rows], events[rows], min_events_per_leaf,
                                   None if sampler is None else sampler())
        if split is None or not split.gain >= min_logrank:
            return node
        go_left = X[rows, split.feature] <= split.threshold
        left = grow(rows[go_left], depth + 1)
        right = grow(rows[~go_left], depth + 1)
        builder.set_split(node, split, left, right)
        return node

    grow(np.arange(X.shape[0]), 0)
    return builder.build()
