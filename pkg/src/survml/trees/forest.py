"""Bagged and random forests of CART or survival trees."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .._rng import substream
from .cart import _as_matrix, encode_classes, grow_maximal_tree
from .survival_tree import grow_survival_tree
from .tree import Tree

KINDS = ("classification", "regression", "survival")


def thread_cap():
    """Worker count allowed by the ``TOOL_THREADS`` environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("TOOL_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Forest:
    kind: str
    trees: tuple
    in_bag: np.ndarray  # (B, n) bootstrap multiplicities
    classes: np.ndarray = None

    @property
    def n_trees(self):
        return len(self.trees)

    def oob_fraction(self):
        """Average share of training rows left out of each tree's resample."""
        return float(np.mean(self.in_bag == 0))

    def predict(self, X):
        if self.kind == "classification":
            K = self.classes.size
            votes = np.zeros((_as_matrix(X).shape[0], K))
            for tree in self.trees:
                idx = np.searchsorted(self.classes, tree.predict(X))
                votes[np.arange(idx.size), idx] += 1
            return self.classes[np.argmax(votes, axis=1)]
        if self.kind == "regression":
            return np.mean([t.predict(X) for t in self.trees], axis=0)
        raise TypeError("use cumulative_hazard for survival forests")

    def predict_proba(self, X):
        if self.kind != "classification":
            raise TypeError("predict_proba needs a classification forest")
        return np.mean([t.predict_proba(X) for t in self.trees], axis=0)

    def cumulative_hazard(self, X, times):
        """``H(t|x) = (1/B) sum_b H_b(t|x)``."""
        if self.kind != "survival":
            raise TypeError("cumulative_hazard needs a survival forest")
        return np.mean([t.cumulative_hazard(X, times) for t in self.trees], axis=0)

    def survival(self, X, times):
        return np.exp(-self.cumulative_hazard(X, times))

    def to_dict(self):
        out = {"kind": self.kind, "trees": [t.to_dict() for t in self.trees],
               "in_bag": self.in_bag.tolist()}
        if self.classes is not None:
            out["classes"] = self.classes.tolist()
        return out

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], tuple(Tree.from_dict(t) for t in d["trees"]),
                   np.asarray(d["in_bag"], dtype=int),
                   None if "classes" not in d else np.asarray(d["classes"]))


def fit_forest(X, y, weights=None, kind="classification", n_trees=100, max_features=None,
               bootstrap=True, seed=0, tree_config=None, n_jobs=None):
    """Fit ``n_trees`` trees on bootstrap resamples with per-split feature subsets.

    ``y`` is a label or target vector, or a ``(durations, events)`` pair for
    ``kind="survival"``. ``max_features`` defaults to all features (bagging).
    Each tree draws its resample and feature subsets from its own labelled
    random stream, so results do not depend on the number of threads.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown forest kind {kind!r}")
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    X = _as_matrix(X)
    n, p = X.shape
    m = p if max_features is None else int(max_features)
    if m > p or m < 1:
        raise ValueError(f"max_features={m} outside 1..{p}")
    cfg = dict(tree_config or {})
    w = None if weights is None else np.asarray(weights, dtype=float)
    classes = None
    if kind == "classification":
        classes, _ = encode_classes(y)
    if kind == "survival":
        durations, events = (np.asarray(a) for a in y)

    def one_tree(b):
        boot_rng = substream(seed, "forest", "bootstrap", b)
        feat_rng = substream(seed, "forest", "features", b)
        rows = boot_rng.integers(0, n, n) if bootstrap else np.arange(n)
        counts = np.bincount(rows, minlength=n)
        mf = None if m == p else m
        if kind == "survival":
            tree = grow_survival_tree(X[rows], durations[rows], events[rows], max_features=mf,
                                      rng=feat_rng, **cfg)
        else:
            tree = grow_maximal_tree(X[rows], np.asarray(y)[rows], None if w is None else w[rows],
                                     task=kind, max_features=mf, rng=feat_rng, classes=classes, **cfg)
        return tree, counts

    workers = min(thread_cap() if n_jobs is None else max(1, int(n_jobs)), n_trees)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one_tree, range(n_trees)))
    else:
        results = [one_tree(b) for b in range(n_trees)]
    trees = tuple(r[0] for r in results)
    in_bag = np.vstack([r[1] for r in results])
    return Forest(kind, trees, in_bag, classes)
