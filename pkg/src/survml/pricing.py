"""Pure premium of a level n-year term-life contract."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ContractSpec:
    """Benefit ``sum_insured`` paid at the end of the year of death within ``horizon`` years."""

    sum_insured: float
    horizon: int
    interest: float

    def __post_init__(self):
        if not self.sum_insured > 0:
            raise ValueError("sum insured must be positive")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        if not self.interest > -1:
            raise ValueError("interest must exceed -1")

    @property
    def discount(self):
        return 1.0 / (1.0 + self.interest)


def pure_premium(survival, spec):
    """``C sum_{t=1..n} (S(t-1) - S(t)) v^t``.

    ``survival`` is a sequence ``S(0), S(1), ..., S(n)`` (at least
    ``horizon + 1`` values; ``S(0)`` is normally 1) or a callable ``t -> S(t)``.
    """
    n = int(spec.horizon)
    if callable(survival):
        S = np.array([float(survival(t)) for t in range(n + 1)])
    else:
        S = np.asarray(survival, dtype=float)[: n + 1]
        if S.size < n + 1:
            raise ValueError("survival curve shorter than the horizon")
    deaths = S[:-1] - S[1:]
    if np.any(deaths < -1e-12):
        raise ValueError("survival curve increases")
    v = spec.discount ** np.arange(1, n + 1)
    return float(spec.sum_insured * np.sum(deaths * v))


def survival_from_q(q):
    """``S(0) = 1`` and ``S(t) = prod_{j<t} (1 - q_j)``."""
    return np.concatenate(([1.0], np.cumprod(1.0 - np.asarray(q, dtype=float))))


def premium_by_age(ages, premiums, path=None):
    """Average premium per distinct age, optionally written to CSV (age, average_premium)."""
    ages = np.asarray(ages)
    premiums = np.asarray(premiums, dtype=float)
    table = [(a, float(premiums[ages == a].mean())) for a in np.unique(ages)]
    if path is not None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["age", "average_premium"])
            for a, p in table:
                writer.writerow([a, repr(p)])
    return table
