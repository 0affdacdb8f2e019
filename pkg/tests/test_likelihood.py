import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal, wishart

from asymptotics import negative_design_params
from errors import DegenerateThetaError, OutOfSupportError
from estimators import mle_params
from intervals import InternalModel, TauParams, validate_sample
from internal_moments import ThetaArrays, realize_sample
from likelihood import (
    bvn_logpdf,
    finite_difference_gradient,
    loglik,
    loglik_gradient,
    max_gradient_error,
    relative_errors,
    VARIANCE_COORDINATES,
    wishart_logpdf,
)
from simulator import generate_theta_sample, replication_rng


def random_params(rng: np.random.Generator) -> TauParams:
    gamma1, gamma2 = rng.uniform(0.5, 3, size=2)
    return TauParams(
        mu_x=rng.uniform(-3, 3),
        mu_y=rng.uniform(-3, 3),
        sigma2_x=rng.uniform(0.5, 3),
        sigma2_y=rng.uniform(0.5, 3),
        rho=rng.uniform(-0.8, 0.8),
        gamma1=gamma1,
        gamma2=gamma2,
        gamma3=rng.uniform(-0.8, 0.8) * math.sqrt(gamma1 * gamma2),
    )


def test_bvn_logpdf_matches_scipy():
    params = negative_design_params()
    expected = multivariate_normal(mean=params.mean, cov=params.between_cov).logpdf([-1.5, 2.0])
    assert bvn_logpdf(-1.5, 2.0, params) == pytest.approx(expected, rel=1e-12)


def test_wishart_logpdf_matches_scipy():
    params = negative_design_params()
    theta2 = (14.0, 31.0, -19.0)
    matrix = np.array([[theta2[0], theta2[2]], [theta2[2], theta2[1]]])
    expected = wishart(df=params.nu, scale=params.gamma).logpdf(matrix)
    assert wishart_logpdf(theta2, params) == pytest.approx(expected, rel=1e-10)


def test_loglik_is_sum_of_densities():
    params = negative_design_params()
    thetas = generate_theta_sample(20, params, replication_rng(5, 20, 0))
    expected = sum(
        bvn_logpdf(t.theta1_x, t.theta1_y, params) + wishart_logpdf((t.theta2_x, t.theta2_y, t.theta2_xy), params)
        for t in thetas.realizations()
    )
    assert loglik(thetas, params) == pytest.approx(expected, rel=1e-10)


def test_kernel_differs_by_a_parameter_free_constant():
    thetas = generate_theta_sample(30, negative_design_params(), replication_rng(9, 30, 0))
    first, second = negative_design_params(), negative_design_params().replace(mu_x=0.5, gamma1=2.0)
    full = loglik(thetas, first) - loglik(thetas, second)
    kernel = loglik(thetas, first, kernel_only=True) - loglik(thetas, second, kernel_only=True)
    assert kernel == pytest.approx(full, rel=1e-9)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    for point in range(20):
        params = random_params(rng)
        thetas = generate_theta_sample(50, params, replication_rng(17, 50, point))
        errors = relative_errors(loglik_gradient(thetas, params), finite_difference_gradient(thetas, params))
        assert errors.max() < 1e-6


def test_gradient_in_variance_coordinates():
    params = negative_design_params()
    thetas = generate_theta_sample(50, params, replication_rng(31, 50, 0))
    gradient = loglik_gradient(thetas, params).in_variance_coordinates(params)
    assert gradient[0] == loglik_gradient(thetas, params).d_mu_x
    for name in ("sigma2_x", "sigma2_y"):
        value = getattr(params, name)
        h = 1e-5 * value
        numeric = (loglik(thetas, params.replace(**{name: value + h})) - loglik(thetas, params.replace(**{name: value - h}))) / (2 * h)
        assert gradient[VARIANCE_COORDINATES.index(name)] == pytest.approx(numeric, rel=1e-5, abs=1e-6)


def test_gradient_near_singular_within_scale():
    thetas = generate_theta_sample(50, negative_design_params(), replication_rng(0, 50, 0))
    assert max_gradient_error(thetas, negative_design_params()) < 1e-6


def test_gradient_vanishes_at_mle():
    rng = np.random.default_rng(99)
    for point in range(20):
        thetas = generate_theta_sample(50, random_params(rng), replication_rng(23, 50, point))
        assert loglik_gradient(thetas, mle_params(thetas)).max_abs < 1e-8 * 50


def test_mle_maximises_kernel():
    thetas = generate_theta_sample(100, negative_design_params(), replication_rng(1, 100, 0))
    best = mle_params(thetas)
    top = loglik(thetas, best, kernel_only=True)
    for changes in ({"mu_x": best.mu_x + 0.05}, {"rho": best.rho * 0.95}, {"gamma1": best.gamma1 * 1.02}):
        assert loglik(thetas, best.replace(**changes), kernel_only=True) < top


def test_gradient_on_uniform_realizations():
    sample = validate_sample([(1, 4, 6, 7), (2, 7, 6, 9), (1, 5, 5, 8), (0, 3, 4, 9)])
    thetas = realize_sample(sample, InternalModel.UNIFORM)
    assert loglik_gradient(thetas, mle_params(thetas)).max_abs < 1e-8 * thetas.n
    assert math.isfinite(loglik(thetas, mle_params(thetas), kernel_only=True))
    with pytest.raises(OutOfSupportError):
        loglik(thetas, mle_params(thetas))


def test_classical_data_is_degenerate():
    sample = validate_sample([(1, 1, 2, 2), (3, 3, 5, 5), (4, 4, 1, 1)])
    thetas = realize_sample(sample, InternalModel.UNIFORM)
    with pytest.raises(DegenerateThetaError):
        loglik_gradient(thetas, negative_design_params())
    with pytest.raises(DegenerateThetaError):
        loglik(thetas, negative_design_params())


def test_outside_support():
    thetas = ThetaArrays(*(np.array(v, dtype=float) for v in ([0, 1], [0, 1], [1, 2], [1, 2], [2, 0.5])))
    with pytest.raises(OutOfSupportError):
        loglik(thetas, negative_design_params())
