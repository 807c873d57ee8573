"""Node impurity measures over weighted class counts."""

import numpy as np


def _proportions(counts):
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("class counts must be nonnegative")
    total = counts.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise ValueError("zero total weight")
    return counts / total


def gini(counts):
    """``sum_k p_k (1 - p_k)``; equals ``2 p (1 - p)`` for two classes."""
    p = _proportions(counts)
    return np.sum(p * (1.0 - p), axis=-1)


def entropy(counts):
    """``-sum_k p_k log p_k`` with natural logarithms and ``0 log 0 = 0``."""
    p = _proportions(counts)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return -np.sum(terms, axis=-1)


CRITERIA = {"gini": gini, "entropy": entropy}


def impurity(counts, kind="gini"):
    try:
        fn = CRITERIA[kind]
    except KeyError:
        raise ValueError(f"unknown impurity {kind!r}") from None
    out = fn(counts)
    return float(out) if np.ndim(out) == 0 else out


def _sweep_impurity(cum, kind):
    """Impurity of each row of a (m, K) matrix of counts, 0 where the row is empty."""
    total = cum.sum(axis=1)
    safe = np.where(total > 0, total, 1.0)
    p = cum / safe[:, None]
    if kind == "gini":
        out = np.sum(p * (1.0 - p), axis=1)
    elif kind == "entropy":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -np.sum(np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0), axis=1)
    else:
        raise ValueError(f"unknown impurity {kind!r}")
    return np.where(total > 0, out, 0.0)
