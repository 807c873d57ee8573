"""Fitted boosted ensemble shared by AdaBoost, GBM and the second-order booster."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..trees.tree import Tree
from .losses import HuberLoss, get_loss


@dataclass(frozen=True)
class BoostedModel:
    """``raw(x) = base_score + sum_b coefficients[b] * learner_b(x)``.

    For AdaBoost the learners are ``{-1, +1}`` classifiers and the prediction
    is the sign of the raw score.
    """

    kind: str
    loss: object
    base_score: float
    learners: tuple
    coefficients: tuple
    learning_rate: float
    log: tuple = field(default=(), repr=False)
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def link(self):
        return getattr(self.loss, "link", "identity")

    def learner_outputs(self, X):
        X = np.asarray(getattr(X, "values", X), dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if self.kind == "adaboost":
            return [t.predict(X).astype(float) for t in self.learners]
        return [t.predict_value(X)[:, 0] for t in self.learners]

    def raw_score(self, X):
        X = np.asarray(getattr(X, "values", X), dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        raw = np.full(X.shape[0], float(self.base_score))
        for c, out in zip(self.coefficients, self.learner_outputs(X)):
            raw = raw + c * out
        return raw

    def predict(self, X):
        raw = self.raw_score(X)
        if self.kind == "adaboost":
            return np.where(raw >= 0, 1, -1)
        return self.loss.inverse_link(raw)

    def staged_raw_scores(self, X):
        raw = np.full(np.asarray(getattr(X, "values", X)).shape[0], float(self.base_score))
        for c, out in zip(self.coefficients, self.learner_outputs(X)):
            raw = raw + c * out
            yield raw.copy()

    def to_dict(self):
        return {"kind": self.kind, "loss": self.loss.to_dict() if self.loss is not None else None,
                "base_score": float(self.base_score), "learning_rate": float(self.learning_rate),
                "coefficients": [float(c) for c in self.coefficients],
                "learners": [t.to_dict() for t in self.learners],
                "log": [list(r) for r in self.log],
                "extras": {k: (list(v) if isinstance(v, (tuple, list, np.ndarray)) else v)
                           for k, v in self.extras.items()}}

    @classmethod
    def from_dict(cls, d):
        loss = None
        if d["loss"] is not None:
            spec = dict(d["loss"])
            name = spec.pop("name")
            loss = HuberLoss(**spec) if name == "huber" else get_loss(name)
        return cls(kind=d["kind"], loss=loss, base_score=d["base_score"],
                   learners=tuple(Tree.from_dict(t) for t in d["learners"]),
                   coefficients=tuple(d["coefficients"]), learning_rate=d["learning_rate"],
                   log=tuple(tuple(r) for r in d.get("log", ())), extras=dict(d.get("extras", {})))

    def write_log(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["round", "train_objective"])
            for row in self.log:
                writer.writerow([int(row[0]), repr(float(row[1]))])


def predict_mortality(model, X):
    """Per-row mortality ``q = sigmoid(raw)``; saturates without overflow."""
    if model.link != "logit":
        raise ValueError("predict_mortality needs a model fitted with a logit link")
    return expit(model.raw_score(X))


def survival_from_mortality(q):
    """``S(k) = prod_{j<k} (1 - q_j)`` for ``k = 0..len(q)``."""
    q = np.asarray(q, dtype=float)
    return np.concatenate(([1.0], np.cumprod(1.0 - q)))
