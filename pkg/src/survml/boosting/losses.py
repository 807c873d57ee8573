"""Boosting losses on raw scores with analytic gradients and hessians."""

from __future__ import annotations

import numpy as np
from scipy.special import expit, log_expit

from ..estimators import break_ties


class LossFunction:
    """Base class. ``value`` is the total loss; derivatives are per row."""

    name = "loss"
    link = "identity"
    second_order = True

    def row_values(self, y, raw, w=None):
        raise NotImplementedError

    def value(self, y, raw, w=None):
        return float(np.sum(self.row_values(y, raw, w)))

    def gradient(self, y, raw, w=None):
        raise NotImplementedError

    def hessian(self, y, raw, w=None):
        raise NotImplementedError

    def inverse_link(self, raw):
        return raw

    def to_dict(self):
        return {"name": self.name}


def _w(w, like):
    return np.ones_like(like, dtype=float) if w is None else np.asarray(w, dtype=float)


class SquaredLoss(LossFunction):
    """``j = w (y - f)^2 / 2`` so the pseudo-residual is exactly ``y - f``."""

    name = "squared"

    def row_values(self, y, raw, w=None):
        return 0.5 * _w(w, raw) * (np.asarray(y, dtype=float) - raw) ** 2

    def gradient(self, y, raw, w=None):
        return _w(w, raw) * (raw - np.asarray(y, dtype=float))

    def hessian(self, y, raw, w=None):
        return _w(w, raw) * np.ones_like(raw, dtype=float)


class AbsoluteLoss(LossFunction):
    """``j = w |y - f|``; the gradient is a subgradient, zero at ties."""

    name = "absolute"
    second_order = False

    def row_values(self, y, raw, w=None):
        return _w(w, raw) * np.abs(np.asarray(y, dtype=float) - raw)

    def gradient(self, y, raw, w=None):
        return _w(w, raw) * np.sign(raw - np.asarray(y, dtype=float))

    def hessian(self, y, raw, w=None):
        return np.zeros_like(raw, dtype=float)


class HuberLoss(LossFunction):
    """Quadratic within ``delta`` of the target, linear beyond it."""

    name = "huber"

    def __init__(self, delta=1.0, quantile=None):
        self.delta = float(delta)
        self.quantile = quantile

    def row_values(self, y, raw, w=None):
        r = np.abs(np.asarray(y, dtype=float) - raw)
        d = self.delta
        return _w(w, raw) * np.where(r <= d, 0.5 * r * r, d * (r - 0.5 * d))

    def gradient(self, y, raw, w=None):
        r = np.asarray(y, dtype=float) - raw
        d = self.delta
        return _w(w, raw) * np.where(np.abs(r) <= d, -r, -d * np.sign(r))

    def hessian(self, y, raw, w=None):
        r = np.asarray(y, dtype=float) - raw
        return _w(w, raw) * (np.abs(r) <= self.delta).astype(float)

    def to_dict(self):
        return {"name": self.name, "delta": self.delta, "quantile": self.quantile}


class ExposureBinomialLoss(LossFunction):
    """Negative exposure-weighted binomial log-likelihood.

    With ``q = sigmoid(f)``: ``j = -ei [delta log q + (1 - delta) log(1 - q)]``,
    ``g = ei (q - delta)`` and ``h = ei q (1 - q)``.
    """

    name = "exposure_binomial"
    link = "logit"

    def row_values(self, y, raw, w=None):
        y = np.asarray(y, dtype=float)
        return -_w(w, raw) * (y * log_expit(raw) + (1.0 - y) * log_expit(-raw))

    def gradient(self, y, raw, w=None):
        return _w(w, raw) * (expit(raw) - np.asarray(y, dtype=float))

    def hessian(self, y, raw, w=None):
        return _w(w, raw) * expit(raw) * expit(-raw)

    def inverse_link(self, raw):
        return expit(raw)


class LogisticLoss(ExposureBinomialLoss):
    """Unweighted logistic loss (``ei = 1`` for every row)."""

    name = "logistic"

    def gradient(self, y, raw, w=None):
        return expit(raw) - np.asarray(y, dtype=float)

    def hessian(self, y, raw, w=None):
        return expit(raw) * expit(-raw)

    def row_values(self, y, raw, w=None):
        return super().row_values(y, raw, None)


class CoxPartialLoss(LossFunction):
    """Negative log partial likelihood of raw log-risk scores.

    ``y`` is a pair ``(durations, events)``. Only the gradient is used by the
    booster; the hessian is identically one.
    """

    name = "cox_partial"
    second_order = False

    @staticmethod
    def _prepare(y):
        durations, events = (np.asarray(a) for a in y)
        durations = break_ties(durations.astype(float), events)
        order = np.argsort(-durations, kind="stable")
        t = durations[order]
        end = np.searchsorted(-t, -t, side="right")
        return order, end, events[order].astype(bool)

    def row_values(self, y, raw, w=None):
        order, end, e = self._prepare(y)
        f = np.asarray(raw, dtype=float)[order]
        c = f.max()
        s0 = np.cumsum(np.exp(f - c))[end - 1]
        out = np.zeros(f.size)
        out[e] = -(f[e] - c - np.log(s0[e]))
        back = np.empty_like(out)
        back[order] = out
        return back

    def gradient(self, y, raw, w=None):
        order, end, e = self._prepare(y)
        f = np.asarray(raw, dtype=float)[order]
        c = f.max()
        ef = np.exp(f - c)
        s0 = np.cumsum(ef)[end - 1]
        # row k belongs to the risk sets of every event i with end[i] > k
        inv = np.zeros(f.size)
        np.add.at(inv, end[e] - 1, 1.0 / s0[e])
        reach = np.cumsum(inv[::-1])[::-1]
        g = ef * reach - e
        back = np.empty_like(g)
        back[order] = g
        return back

    def hessian(self, y, raw, w=None):
        return np.ones(np.asarray(raw).shape, dtype=float)


def get_loss(name, **kwargs):
    table = {"squared": SquaredLoss, "absolute": AbsoluteLoss, "huber": HuberLoss,
             "exposure_binomial": ExposureBinomialLoss, "logistic": LogisticLoss,
             "cox_partial": CoxPartialLoss}
    if isinstance(name, LossFunction):
        return name
    try:
        cls = table[name]
    except KeyError:
        raise ValueError(f"unknown loss {name!r}") from None
    return cls(**kwargs)
