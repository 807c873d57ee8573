import numpy as np
import pytest
from scipy.special import expit

from survml.glm import (GlmModel, binomial_gradient, binomial_loglik, log_exposure, logistic_fit_weighted,
                        poisson_fit_offset, poisson_gradient, poisson_loglik)

from helpers import random_pseudo
from test_trees import DELTA10, EI10


def no_covariates(n):
    return np.zeros((n, 0))


def test_intercept_only_is_balducci():
    p = random_pseudo(0, n=80)
    m = logistic_fit_weighted(no_covariates(len(p)), p.delta, p.ei)
    assert m.predict(no_covariates(1))[0] == pytest.approx(p.delta.sum() / p.ei.sum(), rel=1e-8)


def test_ten_individual_table():
    m = logistic_fit_weighted(no_covariates(10), DELTA10, EI10)
    assert m.predict(no_covariates(1))[0] == pytest.approx(5 / 8.5, rel=1e-8)


def test_unit_exposure_matches_gradient_descent_oracle():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(300, 2))
    y = (rng.random(300) < expit(0.3 + X @ [1.0, -0.5])).astype(float)
    m = logistic_fit_weighted(X, y, np.ones(300))
    Z = np.column_stack([np.ones(300), X])
    b = np.zeros(3)
    for _ in range(20_000):
        b += 0.5 * Z.T @ (y - expit(Z @ b)) / 300
    np.testing.assert_allclose(m.beta, b, atol=1e-5)


def test_score_equation_balances_deaths():
    p = random_pseudo(2, n=200)
    X = np.column_stack([p.interval, p.covariates["x"]])
    m = logistic_fit_weighted(X, p.delta, p.ei)
    assert np.sum(m.predict(X) * p.ei) == pytest.approx(p.delta.sum(), rel=1e-7)


def test_logistic_input_errors():
    with pytest.raises(ValueError):
        logistic_fit_weighted(no_covariates(2), [0, 2], [1, 1])
    with pytest.raises(ValueError):
        logistic_fit_weighted(no_covariates(2), [0, 1], [0.0, 1])


def test_separation_flagged():
    X = np.arange(8.0)[:, None]
    y = (X[:, 0] > 3.5).astype(float)
    m = logistic_fit_weighted(X, y, np.ones(8))
    assert m.report.monotone and np.all(np.isfinite(m.beta))


def test_poisson_intercept_is_central_exposure_rate():
    rng = np.random.default_rng(3)
    ec = rng.uniform(0.2, 1.0, 50)
    d = rng.poisson(0.3 * ec)
    m = poisson_fit_offset(no_covariates(50), d, log_exposure(ec))
    assert m.hazard(no_covariates(1))[0] == pytest.approx(d.sum() / ec.sum(), rel=1e-8)
    assert m.predict(no_covariates(1))[0] == pytest.approx(1 - np.exp(-d.sum() / ec.sum()))


def test_poisson_recovers_synthetic_rate():
    rng = np.random.default_rng(4)
    x = rng.normal(size=5000)
    ec = rng.uniform(0.5, 1.0, 5000)
    d = rng.poisson(ec * np.exp(-2.0 + 0.7 * x))
    m = poisson_fit_offset(x[:, None], d, log_exposure(ec))
    assert np.all(np.abs(m.beta - [-2.0, 0.7]) < 3 * m.standard_errors)


def test_poisson_zero_deaths_flagged():
    m = poisson_fit_offset(no_covariates(5), np.zeros(5), np.zeros(5))
    assert m.report.monotone and m.beta[0] < -5


def test_poisson_input_errors():
    with pytest.raises(ValueError):
        log_exposure([1.0, 0.0])
    with pytest.raises(ValueError):
        poisson_fit_offset(no_covariates(2), [0.5, 1], [0.0, 0.0])


def _fd(f, b, h=1e-6):
    return np.array([(f(b + h * e) - f(b - h * e)) / (2 * h) for e in np.eye(b.size)])


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(5)
    Z = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    b = rng.normal(size=3) * 0.3
    delta = (rng.random(40) < 0.3).astype(float)
    ei = rng.uniform(0.1, 1, 40)
    np.testing.assert_allclose(binomial_gradient(b, Z, delta, ei),
                               _fd(lambda v: binomial_loglik(v, Z, delta, ei), b), rtol=1e-6)
    deaths = rng.poisson(1.0, 40).astype(float)
    off = np.log(ei)
    np.testing.assert_allclose(poisson_gradient(b, Z, deaths, off),
                               _fd(lambda v: poisson_loglik(v, Z, deaths, off), b), rtol=1e-6)


def test_likelihood_trace_nondecreasing():
    p = random_pseudo(6, n=150)
    X = np.column_stack([p.interval, p.covariates["x"]])
    m = logistic_fit_weighted(X, p.delta, p.ei)
    assert m.report.converged and np.all(np.diff(m.report.trace) >= -1e-10)


def test_coefficients_on_original_scale():
    rng = np.random.default_rng(7)
    x = rng.normal(50, 10, 2000)
    y = (rng.random(2000) < expit(-5 + 0.1 * x)).astype(float)
    a = logistic_fit_weighted(x[:, None], y, np.ones(2000))
    b = logistic_fit_weighted((x / 10)[:, None], y, np.ones(2000))
    assert a.beta[1] * 10 == pytest.approx(b.beta[1], rel=1e-7)
    assert a.beta[0] == pytest.approx(b.beta[0], rel=1e-7)


def test_serialization_and_coefficient_csv(tmp_path):
    p = random_pseudo(8)
    X = np.column_stack([p.interval, p.covariates["x"]])
    m = logistic_fit_weighted(X, p.delta, p.ei)
    again = GlmModel.from_dict(m.to_dict())
    np.testing.assert_array_equal(again.predict(X), m.predict(X))
    m.write_coefficients(tmp_path / "coef.csv")
    lines = (tmp_path / "coef.csv").read_text().splitlines()
    assert lines[0] == "name,estimate" and lines[1].startswith("(intercept),") and len(lines) == 4
