"""Kaplan-Meier, Nelson-Aalen, log-rank and Cox proportional hazards."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .optim import ConvergenceReport, newton_maximize


@dataclass(frozen=True)
class StepCurve:
    """Right-continuous step function with value ``initial`` before ``times[0]``."""

    times: np.ndarray
    values: np.ndarray
    initial: float = 1.0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        """Value at ``t`` (the last step at or before ``t``)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right") - 1
        out = np.where(idx >= 0, self.values[np.clip(idx, 0, None)] if self.values.size else self.initial,
                       self.initial)
        return float(out) if out.ndim == 0 else out

    def left_limit(self, t):
        """Value just before ``t``."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="left") - 1
        out = np.where(idx >= 0, self.values[np.clip(idx, 0, None)] if self.values.size else self.initial,
                       self.initial)
        return float(out) if out.ndim == 0 else out

    def to_dict(self):
        return {"kind": type(self).__name__, "initial": self.initial,
                "times": self.times.tolist(), "values": self.values.tolist()}

    def to_json(self):
        return json.dumps(self.to_dict())

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "value"])
            for t, v in zip(self.times, self.values):
                writer.writerow([repr(float(t)), repr(float(v))])


class SurvivalCurve(StepCurve):
    """Survival function; 1 before the first jump, nonincreasing."""

    def __post_init__(self):
        super().__post_init__()
        if self.values.size and (np.any(np.diff(self.values) > 1e-12) or self.values[0] > 1 + 1e-12
                                 or np.any(self.values < -1e-12)):
            raise ValueError("survival values must be nonincreasing in [0, 1]")


class CumHazardCurve(StepCurve):
    """Cumulative hazard; 0 before the first jump, nondecreasing."""

    def __init__(self, times, values):
        super().__init__(times, values, 0.0)

    def __post_init__(self):
        super().__post_init__()
        if self.values.size and (np.any(np.diff(self.values) < -1e-12) or self.values[0] < -1e-12):
            raise ValueError("cumulative hazard must be nonnegative and nondecreasing")

    def survival(self):
        return SurvivalCurve(self.times, np.exp(-self.values))


def curve_from_dict(d):
    kind = d.get("kind")
    if kind == "CumHazardCurve":
        return CumHazardCurve(d["times"], d["values"])
    if kind == "SurvivalCurve":
        return SurvivalCurve(d["times"], d["values"])
    raise ValueError(f"unknown curve kind {kind!r}")


def _check_inputs(durations, events):
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events)
    if durations.size == 0:
        raise ValueError("empty input")
    if durations.shape != events.shape:
        raise ValueError("durations and events must have equal length")
    if np.any(durations < 0) or not np.all(np.isfinite(durations)):
        raise ValueError("durations must be finite and nonnegative")
    if not np.all(np.isin(events, (0, 1))):
        raise ValueError("events must be 0 or 1")
    return durations, events.astype(int)


def risk_table(durations, events):
    """Distinct event times with deaths ``d`` and numbers at risk ``N``."""
    durations, events = _check_inputs(durations, events)
    times = np.unique(durations[events == 1])
    order = np.sort(durations)
    at_risk = order.size - np.searchsorted(order, times, side="left")
    deaths = np.bincount(np.searchsorted(times, durations[events == 1]), minlength=times.size)
    return times, deaths.astype(float), at_risk.astype(float)


def kaplan_meier(durations, events):
    """Product-limit estimate ``S(t) = prod_{t_i <= t} (1 - d_i / N_i)``."""
    times, d, n = risk_table(durations, events)
    return SurvivalCurve(times, np.cumprod(1.0 - d / n))


def nelson_aalen(durations, events):
    """Cumulative hazard estimate ``H(t) = sum_{t_i <= t} d_i / N_i``."""
    times, d, n = risk_table(durations, events)
    return CumHazardCurve(times, np.cumsum(d / n))


def censoring_survival(durations, events):
    """Kaplan-Meier curve of the censoring distribution (flipped indicator)."""
    durations, events = _check_inputs(durations, events)
    return kaplan_meier(durations, 1 - events)


def logrank_statistic(durations_a, events_a, durations_b, events_b):
    """Two-sample log-rank ``X2 = (O_A-E_A)^2/E_A + (O_B-E_B)^2/E_B``.

    Expected deaths use ``e_Ai = n_Ai d_i / n_i`` at each distinct death time.
    The p-value is the chi-square upper tail with one degree of freedom.
    """
    da, ea = _check_inputs(durations_a, events_a)
    db, eb = _check_inputs(durations_b, events_b)
    X2, exp_a, exp_b = _logrank_core(da, ea, db, eb)
    if exp_a <= 0 or exp_b <= 0:
        raise ValueError("a group has zero expected deaths")
    return X2, float(stats.chi2.sf(X2, 1))


def _logrank_core(da, ea, db, eb):
    times = np.unique(np.concatenate([da[ea == 1], db[eb == 1]]))
    if times.size == 0:
        raise ValueError("log-rank needs at least one event")
    sa, sb = np.sort(da), np.sort(db)
    na = sa.size - np.searchsorted(sa, times, side="left")
    nb = sb.size - np.searchsorted(sb, times, side="left")
    dA = np.bincount(np.searchsorted(times, da[ea == 1]), minlength=times.size)
    dB = np.bincount(np.searchsorted(times, db[eb == 1]), minlength=times.size)
    n = na + nb
    d = dA + dB
    exp_a = float(np.sum(na * d / n))
    exp_b = float(np.sum(nb * d / n))
    obs_a, obs_b = float(dA.sum()), float(dB.sum())
    X2 = 0.0
    if exp_a > 0:
        X2 += (obs_a - exp_a) ** 2 / exp_a
    if exp_b > 0:
        X2 += (obs_b - exp_b) ** 2 / exp_b
    return X2, exp_a, exp_b


# ---------------------------------------------------------------------------
# Cox model


def break_ties(durations, events, scale=1e-9):
    """Shift repeated event times so that every death time is distinct.

    The k-th repeat (in input order) of an event time moves up by
    ``k * eps`` with ``eps = scale * max(durations)``. Censored times are left
    alone.
    """
    durations = np.asarray(durations, dtype=float).copy()
    eps = scale * max(float(np.max(durations)), 1.0) if durations.size else 0.0
    seen = {}
    for i in np.flatnonzero(np.asarray(events) == 1):
        k = seen.get(durations[i], 0)
        seen[durations[i]] = k + 1
        if k:
            durations[i] += k * eps
    return durations


class _CoxData:
    """Rows sorted by decreasing duration so risk sets are prefixes."""

    def __init__(self, X, durations, events):
        order = np.argsort(-durations, kind="stable")
        self.X = X[order]
        self.t = durations[order]
        self.e = events[order].astype(bool)
        # risk set of row i: all rows with t_j >= t_i, i.e. prefix up to last equal time
        self.end = np.searchsorted(-self.t, -self.t, side="right")

    def _sums(self, beta):
        eta = self.X @ beta
        c = eta.max() if eta.size else 0.0
        w = np.exp(eta - c)
        s0 = np.cumsum(w)[self.end - 1]
        return eta, c, w, s0

    def loglik(self, beta):
        eta, c, _, s0 = self._sums(beta)
        return float(np.sum(eta[self.e] - c - np.log(s0[self.e])))

    def gradient(self, beta):
        _, _, w, s0 = self._sums(beta)
        s1 = np.cumsum(w[:, None] * self.X, axis=0)[self.end - 1]
        return np.sum(self.X[self.e] - s1[self.e] / s0[self.e, None], axis=0)

    def hessian(self, beta):
        _, _, w, s0 = self._sums(beta)
        s1 = np.cumsum(w[:, None] * self.X, axis=0)[self.end - 1]
        s2 = np.cumsum(w[:, None, None] * self.X[:, :, None] * self.X[:, None, :], axis=0)[self.end - 1]
        m = s1[self.e] / s0[self.e, None]
        return -np.sum(s2[self.e] / s0[self.e, None, None] - m[:, :, None] * m[:, None, :], axis=0)


def _design(X):
    values = getattr(X, "values", X)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return values


def cox_log_partial_likelihood(beta, X, durations, events):
    """``sum_i delta_i [x_i beta - log sum_{t_j >= t_i} exp(x_j beta)]``."""
    X = _design(X)
    durations, events = _check_inputs(durations, events)
    return _CoxData(X, break_ties(durations, events), events).loglik(np.asarray(beta, dtype=float))


def cox_gradient(beta, X, durations, events):
    X = _design(X)
    durations, events = _check_inputs(durations, events)
    return _CoxData(X, break_ties(durations, events), events).gradient(np.asarray(beta, dtype=float))


@dataclass(frozen=True)
class CoxModel:
    beta: np.ndarray
    baseline: CumHazardCurve
    report: ConvergenceReport
    column_names: tuple = ()

    def survival(self, x, t):
        return cox_survival(self, x, t)

    def to_dict(self):
        return {"kind": "cox", "beta": self.beta.tolist(), "baseline": self.baseline.to_dict(),
                "column_names": list(self.column_names),
                "report": {"iterations": self.report.iterations,
                           "gradient_norm": self.report.gradient_norm,
                           "converged": self.report.converged, "monotone": self.report.monotone}}

    @classmethod
    def from_dict(cls, d):
        r = d["report"]
        return cls(np.asarray(d["beta"], dtype=float), curve_from_dict(d["baseline"]),
                   ConvergenceReport(r["iterations"], r["gradient_norm"], r["converged"], r["monotone"]),
                   tuple(d.get("column_names", ())))


def cox_fit(X, durations, events, max_iter=100, tol=1e-8, max_halvings=5, divergence_norm=50.0):
    """Fit ``h(t|x) = h0(t) exp(x beta)`` by Newton ascent on the partial likelihood.

    Tied event times are broken by :func:`break_ties`. The report flags a
    monotone likelihood when ``||beta||`` passes ``divergence_norm`` before the
    gradient vanishes. The Breslow baseline is attached to the result.
    """
    names = tuple(getattr(X, "column_names", ()))
    Xv = _design(X)
    durations, events = _check_inputs(durations, events)
    if Xv.shape[0] != durations.size:
        raise ValueError("X and durations have different lengths")
    if durations.size < 2:
        raise ValueError("need at least two rows")
    if not events.any():
        raise ValueError("all observations are censored")
    data = _CoxData(Xv, break_ties(durations, events), events)
    beta, report = newton_maximize(data.loglik, data.gradient, data.hessian, np.zeros(Xv.shape[1]),
                                   tol=tol, max_iter=max_iter, max_halvings=max_halvings,
                                   divergence_norm=divergence_norm)
    baseline = breslow_baseline(beta, Xv, durations, events)
    return CoxModel(beta=beta, baseline=baseline, report=report, column_names=names)


def breslow_baseline(beta, X, durations, events):
    """``H0(t) = sum_{event t_i <= t} 1 / sum_{t_j >= t_i} exp(x_j beta)``.

    ``beta`` may be a coefficient vector or a fitted :class:`CoxModel`.
    Tied deaths each contribute their own term at the shared time.
    """
    beta = np.asarray(getattr(beta, "beta", beta), dtype=float)
    Xv = _design(X)
    durations, events = _check_inputs(durations, events)
    eta = Xv @ beta
    times = np.unique(durations[events == 1])
    jumps = np.empty(times.size)
    for k, t in enumerate(times):
        # shifted by the largest linear predictor so huge coefficients cannot overflow
        at_risk = eta[durations >= t]
        m = at_risk.max()
        jumps[k] = np.sum((durations == t) & (events == 1)) * np.exp(-m) / np.exp(at_risk - m).sum()
    return CumHazardCurve(times, np.cumsum(jumps))


def cox_survival(model, x, t):
    """``S(t|x) = exp(-H0(t) exp(x beta))``."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    eta = x @ model.beta
    out = np.exp(-np.asarray(model.baseline(t)) * np.exp(eta))
    return float(out) if np.ndim(out) == 0 else out
