"""Shared simulators for the test-suite."""

import numpy as np


def simulate_survival(n, seed, beta=(0.8, -0.5), censor_high=6.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, len(beta)))
    T = rng.exponential(1.0 / (0.2 * np.exp(X @ np.asarray(beta))))
    C = rng.uniform(0.5, censor_high, n)
    return X, np.minimum(T, C), (T <= C).astype(int)


def random_pseudo(seed, n=60, max_duration=6.0):
    """Pseudo table of ``n`` random lives with one numeric covariate ``x``."""
    from survml.data import NUMERIC, SurvivalTable, exposure_expansion

    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    d = rng.uniform(0.05, max_duration, n)
    e = (rng.random(n) < 0.4).astype(int)
    t = SurvivalTable(ids=np.arange(n), durations=d, events=e, covariates={"x": x}, schema={"x": NUMERIC})
    return exposure_expansion(t)
