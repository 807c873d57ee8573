"""Exposure-weighted binomial regression and Poisson regression with an exposure offset."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln, log_expit

from .optim import ConvergenceReport, newton_maximize

FAMILIES = ("binomial_weighted", "poisson_offset")


@dataclass(frozen=True)
class GlmModel:
    """Coefficients on the original covariate scale, intercept first when present."""

    beta: np.ndarray
    family: str
    report: ConvergenceReport
    column_names: tuple
    intercept: bool
    covariance: np.ndarray = None

    def linear_predictor(self, X):
        X = _matrix(X)
        if self.intercept:
            return self.beta[0] + X @ self.beta[1:]
        return X @ self.beta

    def predict(self, X):
        """Mortality per unit exposure: ``sigmoid(eta)`` or ``1 - exp(-exp(eta))``."""
        eta = self.linear_predictor(X)
        if self.family == "binomial_weighted":
            return expit(eta)
        return -np.expm1(-np.exp(eta))

    def hazard(self, X):
        if self.family != "poisson_offset":
            raise TypeError("hazard is defined for the Poisson family")
        return np.exp(self.linear_predictor(X))

    @property
    def standard_errors(self):
        return None if self.covariance is None else np.sqrt(np.diag(self.covariance))

    def coefficient_table(self):
        names = (["(intercept)"] if self.intercept else []) + list(self.column_names)
        return list(zip(names, self.beta.tolist()))

    def write_coefficients(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["name", "estimate"])
            for name, value in self.coefficient_table():
                writer.writerow([name, repr(float(value))])

    def to_dict(self):
        return {"kind": self.family, "beta": self.beta.tolist(), "intercept": self.intercept,
                "column_names": list(self.column_names),
                "report": {"iterations": self.report.iterations,
                           "gradient_norm": self.report.gradient_norm,
                           "converged": self.report.converged, "monotone": self.report.monotone}}

    @classmethod
    def from_dict(cls, d):
        r = d["report"]
        return cls(np.asarray(d["beta"], dtype=float), d["kind"],
                   ConvergenceReport(r["iterations"], r["gradient_norm"], r["converged"], r["monotone"]),
                   tuple(d["column_names"]), d["intercept"])


def _matrix(X):
    values = np.asarray(getattr(X, "values", X), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return values


class _Standardizer:
    """``z = (x - mean) / scale``; constant columns keep scale 1 and mean 0."""

    def __init__(self, X, intercept):
        self.mean = X.mean(axis=0) if intercept else np.zeros(X.shape[1])
        scale = X.std(axis=0)
        const = scale <= 1e-12 * np.maximum(1.0, np.abs(self.mean))
        self.scale = np.where(const, 1.0, scale)
        self.mean = np.where(const, 0.0, self.mean)
        self.intercept = intercept

    def design(self, X):
        Z = (X - self.mean) / self.scale
        return np.column_stack([np.ones(X.shape[0]), Z]) if self.intercept else Z

    def back_transform(self):
        """Matrix ``A`` with ``beta_original = A beta_standardised``."""
        p = self.mean.size
        if not self.intercept:
            return np.diag(1.0 / self.scale)
        A = np.zeros((p + 1, p + 1))
        A[0, 0] = 1.0
        A[0, 1:] = -self.mean / self.scale
        A[1:, 1:] = np.diag(1.0 / self.scale)
        return A


def _fit(loglik, grad, hess, X, names, family, intercept, tol, max_iter):
    std = _Standardizer(X, intercept)
    Z = std.design(X)
    b, report = newton_maximize(lambda b: loglik(Z, b), lambda b: grad(Z, b), lambda b: hess(Z, b),
                                np.zeros(Z.shape[1]), tol=tol, max_iter=max_iter)
    A = std.back_transform()
    cov = None
    try:
        cov_b = np.linalg.inv(-hess(Z, b))
        cov = A @ cov_b @ A.T
    except np.linalg.LinAlgError:
        pass
    return GlmModel(beta=A @ b, family=family, report=report, column_names=names,
                    intercept=intercept, covariance=cov)


def binomial_loglik(beta, Z, delta, ei):
    """``sum ei [delta log q + (1 - delta) log(1 - q)]`` with ``q = sigmoid(Z beta)``."""
    eta = Z @ beta
    return float(np.sum(ei * (delta * log_expit(eta) + (1 - delta) * log_expit(-eta))))


def binomial_gradient(beta, Z, delta, ei):
    return Z.T @ (ei * (delta - expit(Z @ beta)))


def logistic_fit_weighted(X, delta, ei, intercept=True, tol=1e-8, max_iter=100):
    """Maximise the exposure-weighted binomial likelihood by Newton's method.

    With an intercept only the fitted mortality is ``sum(delta) / sum(ei)``.
    Perfectly separated data drive the coefficients off to infinity; the fit
    stops and sets ``report.monotone``.
    """
    names = tuple(getattr(X, "column_names", ()))
    X = _matrix(X)
    delta = np.asarray(delta, dtype=float)
    ei = np.asarray(ei, dtype=float)
    if not np.all(np.isin(delta, (0.0, 1.0))):
        raise ValueError("delta must be 0 or 1")
    if np.any(ei <= 0) or np.any(ei > 1 + 1e-12):
        raise ValueError("exposures must lie in (0, 1]")
    names = names or tuple(f"x{j}" for j in range(X.shape[1]))

    def hess(Z, b):
        eta = Z @ b
        # q (1 - q) written to avoid cancellation when q rounds to 1
        v = expit(eta) * expit(-eta)
        return -(Z * (ei * v)[:, None]).T @ Z

    return _fit(lambda Z, b: binomial_loglik(b, Z, delta, ei),
                lambda Z, b: binomial_gradient(b, Z, delta, ei), hess,
                X, names, "binomial_weighted", intercept, tol, max_iter)


def poisson_loglik(beta, Z, deaths, log_ec):
    eta = log_ec + Z @ beta
    return float(np.sum(deaths * eta - np.exp(eta) - gammaln(deaths + 1)))


def poisson_gradient(beta, Z, deaths, log_ec):
    return Z.T @ (deaths - np.exp(log_ec + Z @ beta))


def poisson_fit_offset(X, deaths, log_ec, intercept=True, tol=1e-8, max_iter=100):
    """Poisson regression ``log E[d] = log(EC) + x beta`` by Newton's method.

    Zero deaths everywhere push the intercept to minus infinity; the fit is
    then flagged ``monotone``.
    """
    names = tuple(getattr(X, "column_names", ()))
    X = _matrix(X)
    deaths = np.asarray(deaths, dtype=float)
    log_ec = np.asarray(log_ec, dtype=float)
    if np.any(deaths < 0) or np.any(deaths != np.round(deaths)):
        raise ValueError("deaths must be nonnegative integers")
    if not np.all(np.isfinite(log_ec)):
        raise ValueError("central exposures must be positive")
    names = names or tuple(f"x{j}" for j in range(X.shape[1]))

    def hess(Z, b):
        mu = np.exp(log_ec + Z @ b)
        return -(Z * mu[:, None]).T @ Z

    return _fit(lambda Z, b: poisson_loglik(b, Z, deaths, log_ec),
                lambda Z, b: poisson_gradient(b, Z, deaths, log_ec), hess,
                X, names, "poisson_offset", intercept, tol, max_iter)


def log_exposure(ec):
    """``log(ec)`` after checking every exposure is positive."""
    ec = np.asarray(ec, dtype=float)
    if np.any(ec <= 0):
        raise ValueError("central exposures must be positive")
    return np.log(ec)
