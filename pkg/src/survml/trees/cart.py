"""Exhaustive CART split search and maximal-tree growth."""

from __future__ import annotations

import numpy as np

from .impurity import _sweep_impurity, impurity
from .tree import Split, TreeBuilder

REL_TIE = 1e-12


def _as_matrix(X):
    X = np.asarray(getattr(X, "values", X), dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def encode_classes(y):
    classes, idx = np.unique(np.asarray(y), return_inverse=True)
    return classes, idx


def _class_matrix(y_idx, weights, n_classes):
    Y = np.zeros((y_idx.size, n_classes))
    Y[np.arange(y_idx.size), y_idx] = weights
    return Y


def _scan_classification(x, Yw, sw, kind, parent_imp):
    """Gain of every admissible threshold on one feature, in increasing order."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    valid = np.flatnonzero(xs[:-1] < xs[1:])
    if valid.size == 0:
        return np.empty(0), np.empty(0)
    cum = np.cumsum(Yw[order], axis=0)
    total = cum[-1]
    cum_sw = np.cumsum(sw[order])
    left = cum[valid]
    right = total[None, :] - left
    p_left = cum_sw[valid] / cum_sw[-1]
    gain = parent_imp - p_left * _sweep_impurity(left, kind) - (1.0 - p_left) * _sweep_impurity(right, kind)
    thresholds = 0.5 * (xs[valid] + xs[valid + 1])
    return thresholds, gain


def _scan_regression(x, y, w, sw, parent_var):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    valid = np.flatnonzero(xs[:-1] < xs[1:])
    if valid.size == 0:
        return np.empty(0), np.empty(0)
    wo, yo = w[order], y[order]
    cw, cwy, cwy2 = np.cumsum(wo), np.cumsum(wo * yo), np.cumsum(wo * yo * yo)
    cum_sw = np.cumsum(sw[order])
    lw, lwy, lwy2 = cw[valid], cwy[valid], cwy2[valid]
    rw, rwy, rwy2 = cw[-1] - lw, cwy[-1] - lwy, cwy2[-1] - lwy2
    with np.errstate(divide="ignore", invalid="ignore"):
        lvar = np.where(lw > 0, lwy2 / lw - (lwy / lw) ** 2, 0.0)
        rvar = np.where(rw > 0, rwy2 / rw - (rwy / rw) ** 2, 0.0)
    p_left = cum_sw[valid] / cum_sw[-1]
    gain = parent_var - p_left * np.maximum(lvar, 0) - (1 - p_left) * np.maximum(rvar, 0)
    return 0.5 * (xs[valid] + xs[valid + 1]), gain


def _weighted_var(y, w):
    W = w.sum()
    if W <= 0:
        return 0.0
    m = np.sum(w * y) / W
    return float(np.sum(w * (y - m) ** 2) / W)


def split_gain(x, y, threshold, weights=None, size_weights=None, task="classification",
               criterion="gini", n_classes=None):
    """Direct two-pass impurity decrease of one split (independent of the sweep)."""
    x = np.asarray(x, dtype=float)
    w = np.ones(x.size) if weights is None else np.asarray(weights, dtype=float)
    sw = w if size_weights is None else np.asarray(size_weights, dtype=float)
    left = x <= threshold
    p_left = sw[left].sum() / sw.sum()
    if task == "regression":
        y = np.asarray(y, dtype=float)
        parts = [_weighted_var(y[m], w[m]) for m in (left, ~left)]
        return _weighted_var(y, w) - p_left * parts[0] - (1 - p_left) * parts[1]
    y = np.asarray(y, dtype=int)
    K = int(n_classes or y.max() + 1)

    def imp(mask):
        counts = np.bincount(y[mask], weights=w[mask], minlength=K)
        return impurity(counts, criterion) if counts.sum() > 0 else 0.0

    return imp(np.ones(x.size, bool)) - p_left * imp(left) - (1 - p_left) * imp(~left)


def _pick(candidates):
    """Max gain with ties to lowest feature then lowest threshold."""
    best = max(g.max() for _, _, g in candidates)
    slack = REL_TIE * max(abs(best), 1e-300)
    for f, thr, g in candidates:
        hits = np.flatnonzero(g >= best - slack)
        if hits.size:
            return f, thr[hits[0]], best
    raise AssertionError("unreachable")


def best_split(X, y, weights=None, criterion="gini", feature_subset=None, size_weights=None,
               task="classification", n_classes=None, min_samples_leaf=1):
    """Best axis-aligned split of a node, or ``None`` when no split has positive gain.

    Parameters
    ----------
    X : (n, p) array
    y : class indices ``0..K-1`` (classification) or real targets (regression)
    weights : per-row weights used for class proportions, e.g. exposures
    criterion : ``"gini"`` or ``"entropy"``; regression uses variance
    feature_subset : feature indices to search (default all)
    size_weights : per-row weights giving the child fractions ``p_L, p_R``;
        defaults to ``weights``
    """
    X = _as_matrix(X)
    n, p = X.shape
    if n < 2:
        return None
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.sum() <= 0:
        raise ValueError("node has zero total weight")
    sw = w if size_weights is None else np.asarray(size_weights, dtype=float)
    features = range(p) if feature_subset is None else sorted(int(f) for f in feature_subset)

    if task == "classification":
        y = np.asarray(y, dtype=int)
        K = int(n_classes or y.max() + 1)
        Yw = _class_matrix(y, w, K)
        parent = impurity(Yw.sum(axis=0), criterion)
    else:
        y = np.asarray(y, dtype=float)
        parent = _weighted_var(y, w)
    if parent <= 0:
        return None

    candidates = []
    for f in features:
        x = X[:, f]
        if task == "classification":
            thr, gain = _scan_classification(x, Yw, sw, criterion, parent)
        else:
            thr, gain = _scan_regression(x, y, w, sw, parent)
        if min_samples_leaf > 1 and thr.size:
            n_left = np.searchsorted(np.sort(x), thr, side="right")
            ok = (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
            thr, gain = thr[ok], gain[ok]
        if thr.size:
            candidates.append((f, thr, gain))
    if not candidates:
        return None
    f, thr, _ = _pick(candidates)
    gain = split_gain(X[:, f], y, thr, w, sw, task, criterion, None if task != "classification" else K)
    if not gain > REL_TIE * parent:
        return None
    return Split(int(f), float(thr), float(gain))


class FeatureSampler:
    """Draws a fresh uniform subset of ``m`` features at every node."""

    def __init__(self, n_features, m, rng):
        if m > n_features or m < 1:
            raise ValueError(f"feature subset size {m} outside 1..{n_features}")
        self.n_features, self.m, self.rng = n_features, m, rng

    def __call__(self):
        if self.m == self.n_features:
            return None
        return np.sort(self.rng.choice(self.n_features, self.m, replace=False))


def grow_maximal_tree(X, y, weights=None, task="classification", criterion="gini", min_node_size=5,
                      max_depth=30, size_weights=None, max_features=None, rng=None,
                      min_samples_leaf=1, classes=None):
    """Grow a CART tree until nodes are pure, small, deep or unsplittable.

    A node holding at most ``min_node_size`` rows becomes a leaf, as does any
    node at ``max_depth``. Classification leaves predict the class of largest
    weight (ties to the lowest class); regression leaves the weighted mean.
    ``max_features`` restricts each split to a random feature subset drawn
    from ``rng``.

    The node error ``R(t)`` is the misclassified weight (or the weighted
    squared error) of the node divided by the root weight.
    """
    X = _as_matrix(X)
    n, p = X.shape
    if n == 0:
        raise ValueError("cannot grow a tree on empty data")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    sw = w if size_weights is None else np.asarray(size_weights, dtype=float)
    if task == "classification":
        if classes is None:
            classes, y_idx = encode_classes(y)
        else:
            classes = np.asarray(classes)
            y_idx = np.searchsorted(classes, np.asarray(y))
        K = classes.size
    elif task == "regression":
        y_idx = np.asarray(y, dtype=float)
        classes, K = None, None
    else:
        raise ValueError(f"unknown task {task!r}")
    sampler = None
    if max_features is not None:
        sampler = FeatureSampler(p, int(max_features), rng if rng is not None else np.random.default_rng(0))

    builder = TreeBuilder(task, p, classes)
    root_weight = w.sum()

    def make_node(rows, depth):
        wr = w[rows]
        if task == "classification":
            counts = np.bincount(y_idx[rows], weights=wr, minlength=K)
            total = counts.sum()
            value = counts / total if total > 0 else np.full(K, 1.0 / K)
            err = (total - counts.max()) / root_weight
            imp = impurity(counts, criterion) if total > 0 else 0.0
        else:
            counts = None
            total = wr.sum()
            mean = np.sum(wr * y_idx[rows]) / total if total > 0 else 0.0
            value = [mean]
            err = float(np.sum(wr * (y_idx[rows] - mean) ** 2) / root_weight)
            imp = _weighted_var(y_idx[rows], wr)
        return builder.add(depth, value, weight=float(total), size=float(sw[rows].sum()),
                           error=float(err), impurity=float(imp), counts=counts), imp

    def grow(rows, depth):
        node, imp = make_node(rows, depth)
        if rows.size <= min_node_size or depth >= max_depth or imp <= 0:
            return node
        split = best_split(X[rows], y_idx[rows], w[rows], criterion,
                           feature_subset=None if sampler is None else sampler(),
                           size_weights=sw[rows], task=task, n_classes=K,
                           min_samples_leaf=min_samples_leaf)
        if split is None:
            return node
        go_left = X[rows, split.feature] <= split.threshold
        left = grow(rows[go_left], depth + 1)
        right = grow(rows[~go_left], depth + 1)
        builder.set_split(node, split, left, right)
        return node

    grow(np.arange(n), 0)
    return builder.build()
