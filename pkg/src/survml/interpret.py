"""Model-agnostic explanations: permutation importance, partial dependence, sampled SHAP.

``predict`` is any callable mapping an (n, p) matrix to n predictions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._rng import substream


@dataclass(frozen=True)
class Explanation:
    kind: str
    names: tuple
    values: np.ndarray
    grid: np.ndarray = None
    std_errors: np.ndarray = None
    residual: float = None
    metadata: dict = field(default_factory=dict)

    def as_dict(self):
        out = {"kind": self.kind, "names": [str(n) for n in self.names],
               "values": np.asarray(self.values).tolist(), "metadata": self.metadata}
        if self.grid is not None:
            out["grid"] = np.asarray(self.grid).tolist()
        if self.std_errors is not None:
            out["std_errors"] = np.asarray(self.std_errors).tolist()
        if self.residual is not None:
            out["residual"] = float(self.residual)
        return out

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            if self.kind == "pdp":
                writer.writerow(["grid", "value"])
                for g, v in zip(self.grid, self.values):
                    writer.writerow([g if isinstance(g, str) else repr(float(g)), repr(float(v))])
                return
            header = ["feature", "value"] + (["std_error"] if self.std_errors is not None else [])
            writer.writerow(header)
            for k, name in enumerate(self.names):
                row = [name, repr(float(self.values[k]))]
                if self.std_errors is not None:
                    row.append(repr(float(self.std_errors[k])))
                writer.writerow(row)


def _matrix(X):
    X = np.asarray(getattr(X, "values", X), dtype=float)
    return X[:, None] if X.ndim == 1 else X


def _names(X, p, feature_names):
    if feature_names is not None:
        return tuple(feature_names)
    return tuple(getattr(X, "column_names", None) or range(p))


def permutation_importance(predict, X, y, metric, repeats=5, seed=0, feature_names=None):
    """Mean increase of ``metric(y, predict(X))`` after shuffling each column.

    ``metric`` is an error (lower is better). Each feature and repeat uses
    its own labelled random stream, so the report depends only on ``seed``.
    """
    names = _names(X, _matrix(X).shape[1], feature_names)
    X = _matrix(X)
    n, p = X.shape
    if n < 2:
        raise ValueError("permutation needs at least two rows")
    base = float(metric(y, predict(X)))
    deltas = np.zeros((p, repeats))
    for j in range(p):
        for r in range(repeats):
            perm = substream(seed, "pfi", j, r).permutation(n)
            Xp = X.copy()
            Xp[:, j] = X[perm, j]
            deltas[j, r] = float(metric(y, predict(Xp))) - base
    return Explanation("pfi", names, deltas.mean(axis=1), std_errors=deltas.std(axis=1),
                       metadata={"seed": seed, "repeats": repeats, "baseline": base})


def default_grid(x, n_points=20):
    """``n_points`` equally spaced values between the 1st and 99th percentiles."""
    lo, hi = np.percentile(np.asarray(x, dtype=float), [1, 99])
    return np.linspace(lo, hi, n_points)


def partial_dependence(predict, X, feature, grid=None, n_points=20, feature_names=None):
    """Average prediction with ``feature`` forced to each grid value.

    ``feature`` is a column index or name. A list of columns is treated as a
    one-hot group: the grid is then the group's levels and each level sets
    its own column to 1 and the others to 0.
    """
    names = _names(X, _matrix(X).shape[1], feature_names)
    X = _matrix(X)

    def resolve(f):
        if isinstance(f, (int, np.integer)):
            if not 0 <= f < X.shape[1]:
                raise KeyError(f"unknown feature {f!r}")
            return int(f)
        if f in names:
            return names.index(f)
        raise KeyError(f"unknown feature {f!r}")

    if isinstance(feature, (list, tuple)):
        cols = [resolve(f) for f in feature]
        values = []
        for c in cols:
            Xg = X.copy()
            Xg[:, cols] = 0.0
            Xg[:, c] = 1.0
            values.append(float(np.mean(predict(Xg))))
        labels = [str(names[c]) for c in cols]
        return Explanation("pdp", tuple(labels), np.array(values), grid=np.array(labels, dtype=object),
                           metadata={"feature": labels})
    j = resolve(feature)
    grid = default_grid(X[:, j], n_points) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    values = np.empty(grid.size)
    for k, v in enumerate(grid):
        Xg = X.copy()
        Xg[:, j] = v
        values[k] = float(np.mean(predict(Xg)))
    return Explanation("pdp", (names[j],), values, grid=grid, metadata={"feature": str(names[j])})


def shap_sample(predict, data, x, n_samples=200, seed=0, feature_names=None):
    """Monte-Carlo Shapley values of one instance.

    For feature ``j`` each draw takes a random donor ``z`` from ``data`` and
    a random feature order; ``x_{+j}`` copies ``x`` on the features preceding
    ``j`` and on ``j`` itself and ``z`` elsewhere, ``x_{-j}`` also takes ``j``
    from ``z``. ``phi_j`` averages ``f(x_{+j}) - f(x_{-j})``. The result keeps
    the Monte-Carlo standard errors and the efficiency residual
    ``sum(phi) - (f(x) - mean f(data))``.
    """
    names = _names(data, _matrix(data).shape[1], feature_names)
    data = _matrix(data)
    x = np.asarray(getattr(x, "values", x), dtype=float).ravel()
    n, p = data.shape
    if n_samples < 1 or n == 0:
        raise ValueError("need at least one sample and a nonempty dataset")
    phi, se = np.zeros(p), np.zeros(p)
    for j in range(p):
        rng = substream(seed, "shap", j)
        donors = data[rng.integers(0, n, n_samples)]
        ranks = np.argsort(rng.random((n_samples, p)), axis=1)
        # features ranked before j in the random order come from x
        before = ranks < ranks[:, [j]]
        plus = np.where(before, x[None, :], donors)
        minus = plus.copy()
        plus[:, j] = x[j]
        minus[:, j] = donors[:, j]
        contrib = np.asarray(predict(np.vstack([plus, minus])), dtype=float)
        diff = contrib[:n_samples] - contrib[n_samples:]
        phi[j] = diff.mean()
        se[j] = diff.std(ddof=1) / np.sqrt(n_samples) if n_samples > 1 else 0.0
    fx = float(np.asarray(predict(x[None, :]), dtype=float)[0])
    mean_pred = float(np.mean(predict(data)))
    return Explanation("shap", names, phi, std_errors=se, residual=float(phi.sum() - (fx - mean_pred)),
                       metadata={"seed": seed, "n_samples": n_samples, "prediction": fx,
                                 "mean_prediction": mean_pred})
