"""SMR, concordance indices, IPCW Brier scores and exposure-weighted ROC curves.

Every entry point takes risk scores oriented so that a higher score means
higher predicted mortality.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .estimators import StepCurve, censoring_survival


def smr_discrete(delta, ei, q):
    """``sum(delta) / sum(ei * q)`` over pseudo-table rows."""
    expected = float(np.sum(np.asarray(ei, dtype=float) * np.asarray(q, dtype=float)))
    if expected <= 0:
        raise ZeroDivisionError("model predicts no deaths")
    return float(np.sum(delta)) / expected


def smr(predicted_survival, X, durations, events, tau):
    """Observed over expected deaths up to ``tau``.

    ``predicted_survival(times, X)`` returns one survival probability per row
    at that row's time. The expected count of row ``i`` is
    ``1 - S(tau) - (1 - delta_i)(1 - S(tau) / S(t_i))``: the probability of
    dying by ``tau`` less, for censored lives, the part of it falling after
    their exit.
    """
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events, dtype=int)
    s_tau = np.asarray(predicted_survival(np.full(durations.size, float(tau)), X), dtype=float)
    s_t = np.asarray(predicted_survival(np.minimum(durations, tau), X), dtype=float)
    cens = events == 0
    if np.any(s_t[cens] <= 0):
        raise ValueError("predicted survival is zero at a censoring time")
    ratio = np.ones_like(s_t)
    ratio[cens] = s_tau[cens] / s_t[cens]
    pred = 1.0 - s_tau - (1 - events) * (1.0 - ratio)
    total = float(pred.sum())
    if total <= 0:
        raise ZeroDivisionError("model predicts no deaths")
    observed = float(np.sum(events[durations <= tau]))
    return observed / total


def _comparable(durations, events):
    t = np.asarray(durations, dtype=float)
    e = np.asarray(events).astype(bool)
    i, j = np.nonzero((t[:, None] < t[None, :]) & e[:, None])
    return i, j


def comparable_pairs(durations, events):
    """Pairs ``(i, j)`` with ``t_i < t_j`` and ``delta_i = 1``."""
    i, j = _comparable(durations, events)
    return list(zip(i.tolist(), j.tolist()))


def _concordance(risk, i, j, weights):
    s = np.asarray(risk, dtype=float)
    conc = np.where(s[i] > s[j], 1.0, np.where(s[i] == s[j], 0.5, 0.0))
    return float(np.sum(weights * conc) / np.sum(weights))


def c_index_harrell(risk, durations, events):
    """Share of comparable pairs whose earlier death has the higher risk (ties 1/2)."""
    i, j = _comparable(durations, events)
    if i.size == 0:
        raise ValueError("no comparable pairs")
    return _concordance(risk, i, j, np.ones(i.size))


def c_index_uno(risk, durations, events, G=None, tau=None):
    """Concordance with each pair weighted by ``G(t_i-)^-2`` at its earlier death.

    ``G`` is the censoring survival curve, estimated from the data when
    omitted. Pairs whose earlier time exceeds ``tau`` are dropped.
    """
    durations = np.asarray(durations, dtype=float)
    if G is None:
        G = censoring_survival(durations, events)
    i, j = _comparable(durations, events)
    if tau is not None:
        keep = durations[i] < tau
        i, j = i[keep], j[keep]
    if i.size == 0:
        raise ValueError("no comparable pairs")
    g = np.asarray(G.left_limit(durations[i]))
    if np.any(g <= 0):
        raise ValueError("censoring survival reaches zero before a used time")
    return _concordance(risk, i, j, g ** -2.0)


def brier_score(predicted_survival, X, durations, events, t, G=None):
    """IPCW Brier score at time ``t``.

    ``(1/n) sum_i [ S(t|x_i)^2 1{t_i <= t, delta_i = 1} / G(t_i-)
    + (1 - S(t|x_i))^2 1{t_i > t} / G(t) ]``.
    ``predicted_survival(times, X)`` returns per-row survival at per-row times.
    """
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events, dtype=int)
    if t > durations.max():
        raise ValueError("t lies beyond the observed follow-up")
    if G is None:
        G = censoring_survival(durations, events)
    s = np.asarray(predicted_survival(np.full(durations.size, float(t)), X), dtype=float)
    died = (durations <= t) & (events == 1)
    alive = durations > t
    g_i = np.asarray(G.left_limit(durations))
    g_t = float(G(t))
    if np.any(g_i[died] <= 0) or (alive.any() and g_t <= 0):
        raise ValueError("censoring survival is zero where a weight is needed")
    term1 = np.where(died, s ** 2 / np.where(died, g_i, 1.0), 0.0)
    term2 = np.where(alive, (1.0 - s) ** 2 / (g_t if g_t > 0 else 1.0), 0.0)
    return float(np.mean(term1 + term2))


def integrated_brier(predicted_survival, X, durations, events, tau, G=None, n_points=100):
    """Trapezoidal average of the Brier score over ``n_points`` grid points on ``[0, tau]``."""
    if G is None:
        G = censoring_survival(durations, events)
    grid = np.linspace(0.0, float(tau), n_points)
    scores = np.array([brier_score(predicted_survival, X, durations, events, t, G) for t in grid])
    return float(trapezoid(scores, grid) / tau)


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    def to_dict(self):
        return {"thresholds": self.thresholds.tolist(), "fpr": self.fpr.tolist(),
                "tpr": self.tpr.tolist(), "auc": self.auc}

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["threshold", "fpr", "tpr"])
            for row in zip(self.thresholds, self.fpr, self.tpr):
                writer.writerow([repr(float(v)) for v in row])


def weighted_roc(delta, ei, scores):
    """ROC curve with each row weighted by its exposure.

    At threshold ``c`` a row is flagged when its score is at least ``c``;
    ``TPR = sum_{dead, flagged} ei / sum_dead ei`` and likewise for ``FPR``
    over the survivors. Thresholds sweep every distinct score from the top;
    the AUC is the trapezoid area.
    """
    delta = np.asarray(delta).astype(int)
    ei = np.asarray(ei, dtype=float)
    scores = np.asarray(scores, dtype=float)
    pos, neg = ei[delta == 1].sum(), ei[delta == 0].sum()
    if pos <= 0 or neg <= 0:
        raise ValueError("both classes need positive exposure")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    tp = np.cumsum(ei[order] * (delta[order] == 1))
    fp = np.cumsum(ei[order] * (delta[order] == 0))
    last = np.concatenate((np.flatnonzero(s[:-1] != s[1:]), [s.size - 1]))
    # normalising by the cumulative totals makes the last point exactly (1, 1)
    tpr = np.concatenate(([0.0], tp[last] / tp[-1]))
    fpr = np.concatenate(([0.0], fp[last] / fp[-1]))
    thresholds = np.concatenate(([np.inf], s[last]))
    auc = float(np.clip(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0), 0.0, 1.0))
    return RocCurve(thresholds, fpr, tpr, auc)


def write_report(report, path):
    """Metric dict to JSON (``.json``) or two-column CSV."""
    if str(path).endswith(".json"):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for k in sorted(report):
            writer.writerow([k, report[k]])


__all__ = ["RocCurve", "StepCurve", "brier_score", "c_index_harrell", "c_index_uno",
           "comparable_pairs", "integrated_brier", "smr", "smr_discrete", "weighted_roc",
           "write_report"]
