# Gradients use (mu_x, mu_y, sigma_x, sigma_y, rho, gamma1, gamma2, gamma3): standard deviations, not variances.

from dataclasses import astuple, dataclass
import logging
import math
from typing import Callable

import numpy as np
from scipy.special import gammaln

from errors import DegenerateThetaError, InvalidParameterError, OutOfSupportError
from intervals import TauParams
from internal_moments import ThetaArrays, ThetaInput, as_theta_arrays

logger = logging.getLogger(__name__)

FD_RELATIVE_STEP = 1e-5
GRADIENT_COORDINATES = ("mu_x", "mu_y", "sigma_x", "sigma_y", "rho", "gamma1", "gamma2", "gamma3")
VARIANCE_COORDINATES = ("mu_x", "mu_y", "sigma2_x", "sigma2_y", "rho", "gamma1", "gamma2", "gamma3")


@dataclass(frozen=True)
class GradientVector:
    d_mu_x: float
    d_mu_y: float
    d_sigma_x: float
    d_sigma_y: float
    d_rho: float
    d_gamma1: float
    d_gamma2: float
    d_gamma3: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.as_array())))

    def in_variance_coordinates(self, params: TauParams) -> np.ndarray:
        """Chain rule to VARIANCE_COORDINATES."""
        out = self.as_array()
        out[2] = self.d_sigma_x / (2 * params.sigma_x)
        out[3] = self.d_sigma_y / (2 * params.sigma_y)
        return out


def wishart_log_normalizer(nu: int) -> float:
    # log(2^nu * sqrt(pi) * Gamma(nu/2) * Gamma((nu-1)/2))
    return nu * math.log(2.0) + 0.5 * math.log(math.pi) + float(gammaln(nu / 2)) + float(gammaln((nu - 1) / 2))


def _quadratic_form(dx, dy, params: TauParams):
    zx = dx / params.sigma_x
    zy = dy / params.sigma_y
    return zx * zx + zy * zy - 2 * params.rho * zx * zy


def bvn_logpdf(theta1_x: float, theta1_y: float, params: TauParams) -> float:
    one_minus = 1 - params.rho ** 2
    q = _quadratic_form(theta1_x - params.mu_x, theta1_y - params.mu_y, params)
    return float(
        -math.log(2 * math.pi) - math.log(params.sigma_x) - math.log(params.sigma_y)
        - 0.5 * math.log(one_minus) - q / (2 * one_minus)
    )


def _wishart_trace(theta2_x, theta2_y, theta2_xy, params: TauParams):
    # tr(Gamma^-1 theta2)
    return (params.gamma2 * theta2_x + params.gamma1 * theta2_y - 2 * params.gamma3 * theta2_xy) / params.G


def wishart_logpdf(theta2: tuple[float, float, float], params: TauParams) -> float:
    theta2_x, theta2_y, theta2_xy = theta2
    det = theta2_x * theta2_y - theta2_xy ** 2
    if theta2_x <= 0 or theta2_y <= 0 or det <= 0:
        raise OutOfSupportError(0, f"theta2 = ({theta2_x}, {theta2_y}, {theta2_xy})")
    nu = params.nu
    return float(
        -0.5 * nu * math.log(params.G)
        + 0.5 * (nu - 3) * math.log(det)
        - 0.5 * _wishart_trace(theta2_x, theta2_y, theta2_xy, params)
        - wishart_log_normalizer(nu)
    )


def _check_strict_support(data: ThetaArrays) -> np.ndarray:
    flat = (data.theta2_x <= 0) | (data.theta2_y <= 0)
    if flat.any():
        index = int(np.argmax(flat))
        raise DegenerateThetaError(f"observation {index} has zero internal variance")
    det = data.theta2_x * data.theta2_y - data.theta2_xy ** 2
    # rank-one up to rounding counts as the boundary
    outside = det <= 1e-12 * data.theta2_x * data.theta2_y
    if outside.any():
        index = int(np.argmax(outside))
        raise OutOfSupportError(index, f"det(theta2) = {det[index]:.3e}")
    return det


def _check_gradient_support(data: ThetaArrays):
    if (data.theta2_x < 0).any() or (data.theta2_y < 0).any():
        raise OutOfSupportError(int(np.argmax((data.theta2_x < 0) | (data.theta2_y < 0))), "negative internal variance")
    sx, sy, sxy = data.theta2_x.sum(), data.theta2_y.sum(), data.theta2_xy.sum()
    if sx <= 0 or sy <= 0 or sx * sy - sxy ** 2 <= 0:
        raise DegenerateThetaError("the pooled internal variation matrix is singular")


def loglik(thetas: ThetaInput, params: TauParams, kernel_only: bool = False) -> float:
    """Log of the interval likelihood.

    With kernel_only the parameter-free terms (normalizing constants and the
    det(theta2) power) are dropped; that form stays finite for rank-one theta2.
    """
    data = as_theta_arrays(thetas)
    n = data.n
    if n < 1:
        raise InvalidParameterError("thetas", "at least one observation is required")

    one_minus = 1 - params.rho ** 2
    q = _quadratic_form(data.theta1_x - params.mu_x, data.theta1_y - params.mu_y, params)
    normal_part = (
        -n * (math.log(params.sigma_x) + math.log(params.sigma_y) + 0.5 * math.log(one_minus))
        - float(np.sum(q)) / (2 * one_minus)
    )
    trace = float(np.sum(_wishart_trace(data.theta2_x, data.theta2_y, data.theta2_xy, params)))
    wishart_part = -0.5 * n * params.nu * math.log(params.G) - 0.5 * trace

    if kernel_only:
        _check_gradient_support(data)
        return normal_part + wishart_part

    det = _check_strict_support(data)
    constants = -n * math.log(2 * math.pi) - n * wishart_log_normalizer(params.nu)
    return normal_part + wishart_part + 0.5 * (params.nu - 3) * float(np.sum(np.log(det))) + constants


def loglik_gradient(thetas: ThetaInput, params: TauParams) -> GradientVector:
    data = as_theta_arrays(thetas)
    _check_gradient_support(data)
    n = data.n
    nu = params.nu
    sx, sy, rho = params.sigma_x, params.sigma_y, params.rho
    one_minus = 1 - rho ** 2

    dx = data.theta1_x - params.mu_x
    dy = data.theta1_y - params.mu_y
    sum_dx, sum_dy = float(dx.sum()), float(dy.sum())
    sum_dx2, sum_dy2, sum_dxdy = float((dx * dx).sum()), float((dy * dy).sum()), float((dx * dy).sum())

    g1, g2, g3, G = params.gamma1, params.gamma2, params.gamma3, params.G
    t_x, t_y, t_xy = float(data.theta2_x.sum()), float(data.theta2_y.sum()), float(data.theta2_xy.sum())
    G2 = G * G

    return GradientVector(
        d_mu_x=(sum_dx / sx ** 2 - rho * sum_dy / (sx * sy)) / one_minus,
        d_mu_y=(sum_dy / sy ** 2 - rho * sum_dx / (sx * sy)) / one_minus,
        d_sigma_x=-n / sx + (sum_dx2 / sx ** 3 - rho * sum_dxdy / (sx ** 2 * sy)) / one_minus,
        d_sigma_y=-n / sy + (sum_dy2 / sy ** 3 - rho * sum_dxdy / (sx * sy ** 2)) / one_minus,
        d_rho=n * rho / one_minus
            - rho / one_minus ** 2 * (sum_dx2 / sx ** 2 + sum_dy2 / sy ** 2)
            + (1 + rho ** 2) / one_minus ** 2 * sum_dxdy / (sx * sy),
        d_gamma1=-n * nu * g2 / (2 * G) + g2 ** 2 / (2 * G2) * t_x - (G - g1 * g2) / (2 * G2) * t_y - g2 * g3 / G2 * t_xy,
        d_gamma2=-n * nu * g1 / (2 * G) - (G - g1 * g2) / (2 * G2) * t_x + g1 ** 2 / (2 * G2) * t_y - g1 * g3 / G2 * t_xy,
        d_gamma3=n * nu * g3 / G - g2 * g3 / G2 * t_x - g1 * g3 / G2 * t_y + (G + 2 * g3 ** 2) / G2 * t_xy,
    )


def params_to_coordinates(params: TauParams) -> np.ndarray:
    return np.array([
        params.mu_x, params.mu_y, params.sigma_x, params.sigma_y,
        params.rho, params.gamma1, params.gamma2, params.gamma3,
    ])


def coordinates_to_params(point: np.ndarray, nu: int) -> TauParams:
    mu_x, mu_y, sigma_x, sigma_y, rho, g1, g2, g3 = (float(v) for v in point)
    return TauParams(
        mu_x=mu_x, mu_y=mu_y, sigma2_x=sigma_x ** 2, sigma2_y=sigma_y ** 2,
        rho=rho, gamma1=g1, gamma2=g2, gamma3=g3, nu=nu,
    )


def _fd_step(index: int, value: float, params: TauParams) -> float:
    """Central-difference step, a fixed fraction of the room left to the domain boundary."""
    scale = max(abs(value), 1.0)
    if index == 4:
        scale = min(scale, 1 - abs(value))
    elif index in (2, 3):
        scale = min(scale, value)
    elif index == 5:
        # gamma1 can shrink by G / gamma2 before Gamma turns singular
        scale = min(scale, params.G / params.gamma2)
    elif index == 6:
        scale = min(scale, params.G / params.gamma1)
    elif index == 7:
        scale = min(scale, math.sqrt(params.gamma1 * params.gamma2) - abs(value))
    return FD_RELATIVE_STEP * scale


def finite_difference_gradient(thetas: ThetaInput, params: TauParams, objective: Callable[[ThetaArrays, TauParams], float] | None = None) -> GradientVector:
    """Central differences of the kernel log-likelihood in gradient coordinates."""
    data = as_theta_arrays(thetas)
    if objective is None:
        objective = lambda d, p: loglik(d, p, kernel_only=True)
    point = params_to_coordinates(params)
    grad = np.empty(len(point))
    for i, value in enumerate(point):
        h = _fd_step(i, value, params)
        up, down = point.copy(), point.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (objective(data, coordinates_to_params(up, params.nu)) - objective(data, coordinates_to_params(down, params.nu))) / (2 * h)
    return GradientVector(*grad)


def relative_errors(analytic: GradientVector, numeric: GradientVector) -> np.ndarray:
    a, f = analytic.as_array(), numeric.as_array()
    return np.abs(a - f) / np.maximum(np.maximum(np.abs(a), np.abs(f)), 1.0)


def max_gradient_error(thetas: ThetaInput, params: TauParams) -> float:
    error = float(np.max(relative_errors(loglik_gradient(thetas, params), finite_difference_gradient(thetas, params))))
    logger.debug("gradient check: max relative error %.3e", error)
    return error
