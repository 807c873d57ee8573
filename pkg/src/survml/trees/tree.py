"""Array-backed binary decision tree shared by CART, survival trees and boosters."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..estimators import CumHazardCurve, curve_from_dict

LEAF = -1


@dataclass(frozen=True)
class Split:
    """Send rows with ``x[feature] <= threshold`` left."""

    feature: int
    threshold: float
    gain: float


@dataclass(frozen=True)
class Tree:
    """Nodes in preorder: every child index is larger than its parent's.

    ``value`` holds class proportions ``p(k|t)`` for classification, the node
    mean for regression and the raw leaf score for boosters. ``counts`` holds
    the weighted class counts ``N_k(t)``. ``error`` is the node's share of the
    root risk (``R(t)``), ``origin`` the node id in the unpruned tree.
    """

    task: str
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    weight: np.ndarray
    size: np.ndarray
    error: np.ndarray
    impurity: np.ndarray
    gain: np.ndarray
    depth: np.ndarray
    origin: np.ndarray
    n_features: int
    classes: np.ndarray = None
    counts: np.ndarray = None
    curves: tuple = field(default=None, repr=False)

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def n_leaves(self):
        return int(np.sum(self.feature == LEAF))

    def is_leaf(self, node):
        return self.feature[node] == LEAF

    def internal_nodes(self):
        return np.flatnonzero(self.feature != LEAF)

    def leaves(self):
        return np.flatnonzero(self.feature == LEAF)

    def apply(self, X):
        """Leaf index reached by each row of ``X``."""
        X = np.asarray(getattr(X, "values", X), dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        node = np.zeros(X.shape[0], dtype=int)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def node_members(self, X):
        """Row indices of ``X`` reaching each node (list indexed by node)."""
        X = np.asarray(getattr(X, "values", X), dtype=float)
        members = [None] * self.n_nodes
        members[0] = np.arange(X.shape[0])
        for t in range(self.n_nodes):
            f = self.feature[t]
            if f == LEAF:
                continue
            rows = members[t]
            go_left = X[rows, f] <= self.threshold[t]
            members[self.left[t]] = rows[go_left]
            members[self.right[t]] = rows[~go_left]
        return members

    def predict_value(self, X):
        return self.value[self.apply(X)]

    def predict(self, X):
        leaf = self.apply(X)
        if self.task == "classification":
            return self.classes[np.argmax(self.value[leaf], axis=1)]
        if self.task == "survival":
            raise TypeError("use cumulative_hazard for survival trees")
        return self.value[leaf, 0]

    def predict_proba(self, X):
        if self.task != "classification":
            raise TypeError("predict_proba needs a classification tree")
        return self.value[self.apply(X)]

    def cumulative_hazard(self, X, times):
        """Matrix of leaf Nelson-Aalen values, rows of ``X`` by ``times``."""
        if self.curves is None:
            raise TypeError("tree carries no hazard curves")
        leaf = self.apply(X)
        times = np.atleast_1d(np.asarray(times, dtype=float))
        table = {t: self.curves[t](times) for t in np.unique(leaf)}
        return np.vstack([table[t] for t in leaf]) if leaf.size else np.zeros((0, times.size))

    def risk(self):
        """``R(T)``: the sum of leaf errors."""
        return float(self.error[self.leaves()].sum())

    def subtree_collapsed(self, collapse):
        """Copy with every node in ``collapse`` turned into a leaf."""
        collapse = set(int(c) for c in collapse)
        keep, new_id = [], {}
        stack = [0]
        while stack:
            t = stack.pop()
            new_id[t] = len(keep)
            keep.append(t)
            if self.feature[t] != LEAF and t not in collapse:
                stack.append(self.right[t])
                stack.append(self.left[t])
        keep = np.array(keep)
        feature = self.feature[keep].copy()
        left = np.full(keep.size, LEAF)
        right = np.full(keep.size, LEAF)
        for i, t in enumerate(keep):
            if feature[i] == LEAF or t in collapse:
                feature[i] = LEAF
            else:
                left[i] = new_id[self.left[t]]
                right[i] = new_id[self.right[t]]
        threshold = np.where(feature == LEAF, np.nan, self.threshold[keep])
        gain = np.where(feature == LEAF, 0.0, self.gain[keep])
        return replace(
            self, feature=feature, threshold=threshold, left=left, right=right,
            value=self.value[keep], weight=self.weight[keep], size=self.size[keep],
            error=self.error[keep], impurity=self.impurity[keep], gain=gain,
            depth=self.depth[keep], origin=self.origin[keep],
            counts=None if self.counts is None else self.counts[keep],
            curves=None if self.curves is None else tuple(self.curves[t] for t in keep))

    def to_dict(self):
        nodes = []
        for t in range(self.n_nodes):
            node = {"id": t, "origin": int(self.origin[t]), "depth": int(self.depth[t]),
                    "weight": float(self.weight[t]), "size": float(self.size[t]),
                    "error": float(self.error[t]), "impurity": float(self.impurity[t]),
                    "value": self.value[t].tolist()}
            if self.counts is not None:
                node["counts"] = self.counts[t].tolist()
            if self.feature[t] != LEAF:
                node.update(feature=int(self.feature[t]), threshold=float(self.threshold[t]),
                            gain=float(self.gain[t]), left=int(self.left[t]), right=int(self.right[t]))
            if self.curves is not None:
                node["curve"] = self.curves[t].to_dict()
            nodes.append(node)
        out = {"task": self.task, "n_features": self.n_features, "nodes": nodes}
        if self.classes is not None:
            out["classes"] = self.classes.tolist()
        return out

    @classmethod
    def from_dict(cls, d):
        nodes = d["nodes"]
        n = len(nodes)
        get = lambda key, default: np.array([nd.get(key, default) for nd in nodes])  # noqa: E731
        counts = None
        if nodes and "counts" in nodes[0]:
            counts = np.array([nd["counts"] for nd in nodes], dtype=float)
        curves = None
        if nodes and "curve" in nodes[0]:
            curves = tuple(curve_from_dict(nd["curve"]) for nd in nodes)
        return cls(
            task=d["task"], feature=get("feature", LEAF).astype(int),
            threshold=get("threshold", np.nan).astype(float),
            left=get("left", LEAF).astype(int), right=get("right", LEAF).astype(int),
            value=np.array([nd["value"] for nd in nodes], dtype=float).reshape(n, -1),
            weight=get("weight", 0.0).astype(float), size=get("size", 0.0).astype(float),
            error=get("error", 0.0).astype(float), impurity=get("impurity", 0.0).astype(float),
            gain=get("gain", 0.0).astype(float), depth=get("depth", 0).astype(int),
            origin=get("origin", 0).astype(int), n_features=int(d["n_features"]),
            classes=None if "classes" not in d else np.array(d["classes"]),
            counts=counts, curves=curves)


class TreeBuilder:
    """Accumulates nodes in preorder and freezes them into a :class:`Tree`."""

    def __init__(self, task, n_features, classes=None):
        self.task = task
        self.n_features = n_features
        self.classes = classes
        self.rows = []

    def add(self, depth, value, weight=0.0, size=0.0, error=0.0, impurity=0.0, counts=None, curve=None):
        self.rows.append({"feature": LEAF, "threshold": np.nan, "left": LEAF, "right": LEAF,
                          "value": np.atleast_1d(np.asarray(value, dtype=float)), "weight": weight,
                          "size": size, "error": error, "impurity": impurity, "gain": 0.0,
                          "depth": depth, "counts": counts, "curve": curve})
        return len(self.rows) - 1

    def set_split(self, node, split, left, right):
        r = self.rows[node]
        r.update(feature=split.feature, threshold=split.threshold, gain=split.gain, left=left, right=right)

    def build(self):
        col = lambda key, dtype: np.array([r[key] for r in self.rows], dtype=dtype)  # noqa: E731
        counts = None
        if self.rows and self.rows[0]["counts"] is not None:
            counts = np.vstack([r["counts"] for r in self.rows]).astype(float)
        curves = None
        if self.rows and self.rows[0]["curve"] is not None:
            curves = tuple(r["curve"] for r in self.rows)
        return Tree(
            task=self.task, feature=col("feature", int), threshold=col("threshold", float),
            left=col("left", int), right=col("right", int),
            value=np.vstack([r["value"] for r in self.rows]), weight=col("weight", float),
            size=col("size", float), error=col("error", float), impurity=col("impurity", float),
            gain=col("gain", float), depth=col("depth", int), origin=np.arange(len(self.rows)),
            n_features=self.n_features,
            classes=None if self.classes is None else np.asarray(self.classes),
            counts=counts, curves=curves)


__all__ = ["LEAF", "Split", "Tree", "TreeBuilder", "CumHazardCurve"]
