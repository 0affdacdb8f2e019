from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np

from errors import DegenerateThetaError, EmptySampleError, InvalidParameterError
from intervals import DEFAULT_NU, BivariateIntervalSample, InternalModel, TauParams
from internal_moments import (
    PERT_CROSS_DIVISOR,
    PERT_DIVISOR,
    UNIFORM_DIVISOR,
    ThetaInput,
    as_theta_arrays,
    realize_sample,
)

logger = logging.getLogger(__name__)


class RhoStatus(str, Enum):
    DEFINED = "defined"
    ZERO_VARIANCE = "zero-variance"


@dataclass(frozen=True)
class BetweenEstimates:
    mu_x_hat: float
    mu_y_hat: float
    sigma2_x_hat: float
    sigma2_y_hat: float
    rho_hat: float
    sigma_xy_hat: float
    rho_status: RhoStatus = RhoStatus.DEFINED

    @property
    def rho_defined(self) -> bool:
        return self.rho_status is RhoStatus.DEFINED


@dataclass(frozen=True)
class WithinEstimates:
    gamma1_hat: float
    gamma2_hat: float
    gamma3_hat: float
    nu: int

    @property
    def G_hat(self) -> float:
        return self.gamma1_hat * self.gamma2_hat - self.gamma3_hat ** 2


@dataclass(frozen=True)
class VarianceParts:
    var_x: float
    var_y: float
    cov_xy: float


@dataclass(frozen=True)
class OverallMoments:
    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    cov_xy: float
    # only the likelihood-based estimators carry the decomposition
    within: VarianceParts | None = None
    between: VarianceParts | None = None


@dataclass(frozen=True)
class CenterRangeRow:
    center: float
    range: float
    combined: float
    symbolic: float


@dataclass(frozen=True)
class CenterRangeStats:
    x: CenterRangeRow
    y: CenterRangeRow
    xy: CenterRangeRow


def _require_nu(nu: int) -> int:
    if int(nu) != nu or nu <= 2:
        raise InvalidParameterError("nu", f"degrees of freedom must be an integer above 2, got {nu}")
    return int(nu)


def between_mles(thetas: ThetaInput) -> BetweenEstimates:
    data = as_theta_arrays(thetas)
    if data.n < 2:
        raise EmptySampleError(data.n)

    mu_x = float(np.mean(data.theta1_x))
    mu_y = float(np.mean(data.theta1_y))
    dx = data.theta1_x - mu_x
    dy = data.theta1_y - mu_y
    sigma2_x = float(np.mean(dx * dx))
    sigma2_y = float(np.mean(dy * dy))
    sigma_xy = float(np.mean(dx * dy))

    if sigma2_x > 0 and sigma2_y > 0:
        rho = float(np.clip(sigma_xy / math.sqrt(sigma2_x * sigma2_y), -1.0, 1.0))
        status = RhoStatus.DEFINED
    else:
        logger.warning("between variance is zero, correlation is undefined")
        rho = math.nan
        status = RhoStatus.ZERO_VARIANCE

    return BetweenEstimates(mu_x, mu_y, sigma2_x, sigma2_y, rho, sigma_xy, status)


def within_mles(thetas: ThetaInput, nu: int = DEFAULT_NU) -> WithinEstimates:
    data = as_theta_arrays(thetas)
    if data.n < 1:
        raise EmptySampleError(data.n, minimum=1)
    nu = _require_nu(nu)
    return WithinEstimates(
        gamma1_hat=float(np.mean(data.theta2_x)) / nu,
        gamma2_hat=float(np.mean(data.theta2_y)) / nu,
        gamma3_hat=float(np.mean(data.theta2_xy)) / nu,
        nu=nu,
    )


def mle_params(thetas: ThetaInput, nu: int = DEFAULT_NU) -> TauParams:
    """The closed-form maximiser of the interval likelihood as a parameter set."""
    between = between_mles(thetas)
    within = within_mles(thetas, nu)
    if within.gamma1_hat <= 0 or within.gamma2_hat <= 0 or within.G_hat <= 0:
        raise DegenerateThetaError("the pooled internal variation matrix is singular")
    if not between.rho_defined:
        raise InvalidParameterError("rho", "between variance is zero, the likelihood has no maximiser")
    return TauParams(
        mu_x=between.mu_x_hat,
        mu_y=between.mu_y_hat,
        sigma2_x=between.sigma2_x_hat,
        sigma2_y=between.sigma2_y_hat,
        rho=between.rho_hat,
        gamma1=within.gamma1_hat,
        gamma2=within.gamma2_hat,
        gamma3=within.gamma3_hat,
        nu=within.nu,
    )


def within_scale(model: InternalModel, nu: int) -> float:
    # uniform: the divisor 12 of the realizations is replaced by nu
    if model is InternalModel.UNIFORM:
        return UNIFORM_DIVISOR / nu
    return 1.0


def overall_estimates(sample: BivariateIntervalSample, model: InternalModel = InternalModel.UNIFORM, nu: int = DEFAULT_NU) -> OverallMoments:
    nu = _require_nu(nu)
    thetas = realize_sample(sample, model)
    between = between_mles(thetas)
    scale = within_scale(model, nu)
    within = VarianceParts(
        var_x=scale * float(np.mean(thetas.theta2_x)),
        var_y=scale * float(np.mean(thetas.theta2_y)),
        cov_xy=scale * float(np.mean(thetas.theta2_xy)),
    )
    return OverallMoments(
        mean_x=between.mu_x_hat,
        mean_y=between.mu_y_hat,
        var_x=within.var_x + between.sigma2_x_hat,
        var_y=within.var_y + between.sigma2_y_hat,
        cov_xy=within.cov_xy + between.sigma_xy_hat,
        within=within,
        between=VarianceParts(between.sigma2_x_hat, between.sigma2_y_hat, between.sigma_xy_hat),
    )


def empirical_stats(sample: BivariateIntervalSample) -> OverallMoments:
    """Bertrand-Goupil mean and variance, Billard covariance."""
    e = sample.as_arrays()
    n = e.n
    if n < 1:
        raise EmptySampleError(n, minimum=1)

    mean_x = float(np.sum(e.c + e.d)) / (2 * n)
    mean_y = float(np.sum(e.a + e.b)) / (2 * n)
    # the subtracted square is the plain squared mean, without a further /n
    var_x = float(np.sum(e.c ** 2 + e.c * e.d + e.d ** 2)) / (3 * n) - mean_x ** 2
    var_y = float(np.sum(e.a ** 2 + e.a * e.b + e.b ** 2)) / (3 * n) - mean_y ** 2
    ya, yb = e.a - mean_y, e.b - mean_y
    xc, xd = e.c - mean_x, e.d - mean_x
    cov = float(np.sum(2 * ya * xc + ya * xd + yb * xc + 2 * yb * xd)) / (6 * n)
    return OverallMoments(mean_x, mean_y, var_x, var_y, cov)


def expanded_uniform_moments(sample: BivariateIntervalSample) -> OverallMoments:
    """Endpoint expansion of the nu = 12 uniform estimators."""
    e = sample.as_arrays()
    n = e.n
    mean_x = float(np.sum(e.c + e.d)) / (2 * n)
    mean_y = float(np.sum(e.a + e.b)) / (2 * n)
    xc, xd = e.c - mean_x, e.d - mean_x
    ya, yb = e.a - mean_y, e.b - mean_y
    return OverallMoments(
        mean_x=mean_x,
        mean_y=mean_y,
        var_x=float(np.sum(xc ** 2 + xc * xd + xd ** 2)) / (3 * n),
        var_y=float(np.sum(ya ** 2 + ya * yb + yb ** 2)) / (3 * n),
        cov_xy=float(np.sum(2 * ya * xc + ya * xd + yb * xc + 2 * yb * xd)) / (6 * n),
    )


def overall_closed_form(sample: BivariateIntervalSample, model: InternalModel = InternalModel.UNIFORM, nu: int = DEFAULT_NU) -> OverallMoments:
    """The overall estimators written directly in interval endpoints, without realizations."""
    nu = _require_nu(nu)
    e = sample.as_arrays()
    n = e.n

    if model is InternalModel.PERT:
        mode_x = np.where(np.isnan(e.mode_x), (e.c + e.d) / 2, e.mode_x)
        mode_y = np.where(np.isnan(e.mode_y), (e.a + e.b) / 2, e.mode_y)
        mu_xi = (e.c + 4 * mode_x + e.d) / 6
        mu_yi = (e.a + 4 * mode_y + e.b) / 6
        mean_x, mean_y = float(np.mean(mu_xi)), float(np.mean(mu_yi))
        return OverallMoments(
            mean_x=mean_x,
            mean_y=mean_y,
            var_x=float(np.sum((mu_xi - e.c) * (e.d - mu_xi))) / (PERT_DIVISOR * n)
                + float(np.sum((mu_xi - mean_x) ** 2)) / n,
            var_y=float(np.sum((mu_yi - e.a) * (e.b - mu_yi))) / (PERT_DIVISOR * n)
                + float(np.sum((mu_yi - mean_y) ** 2)) / n,
            cov_xy=float(np.sum((mu_xi - e.c) * (e.b - mu_yi) + (mu_yi - e.a) * (e.d - mu_xi))) / (PERT_CROSS_DIVISOR * n)
                + float(np.sum((mu_xi - mean_x) * (mu_yi - mean_y))) / n,
        )

    mean_x = float(np.sum(e.c + e.d)) / (2 * n)
    mean_y = float(np.sum(e.a + e.b)) / (2 * n)
    xc, xd = e.c - mean_x, e.d - mean_x
    ya, yb = e.a - mean_y, e.b - mean_y

    if model is InternalModel.TRIANGULAR:
        return OverallMoments(
            mean_x=mean_x,
            mean_y=mean_y,
            var_x=float(np.sum(7 * xc ** 2 + 10 * xc * xd + 7 * xd ** 2)) / (24 * n),
            var_y=float(np.sum(7 * ya ** 2 + 10 * ya * yb + 7 * yb ** 2)) / (24 * n),
            cov_xy=float(np.sum(7 * ya * xc + 5 * ya * xd + 5 * yb * xc + 7 * yb * xd)) / (24 * n),
        )

    mid_x = (e.c + e.d) / 2 - mean_x
    mid_y = (e.a + e.b) / 2 - mean_y
    return OverallMoments(
        mean_x=mean_x,
        mean_y=mean_y,
        var_x=float(np.sum((e.d - e.c) ** 2)) / (nu * n) + float(np.sum(mid_x ** 2)) / n,
        var_y=float(np.sum((e.b - e.a) ** 2)) / (nu * n) + float(np.sum(mid_y ** 2)) / n,
        cov_xy=float(np.sum((e.b - e.a) * (e.d - e.c))) / (nu * n) + float(np.sum(mid_x * mid_y)) / n,
    )


def _relative_gap(left: float, right: float, scale: float) -> float:
    scale = max(abs(left), abs(right), scale)
    if scale == 0:
        return 0.0
    return abs(left - right) / scale


def moments_discrepancy(left: OverallMoments, right: OverallMoments) -> float:
    """Largest relative difference in (var_x, var_y, cov_xy).

    The covariance is measured against sqrt(var_x * var_y) as well, so a
    covariance that should be zero is not judged by its own rounding noise.
    """
    cov_scale = math.sqrt(max(left.var_x, 0.0) * max(left.var_y, 0.0))
    return max(
        _relative_gap(left.var_x, right.var_x, 0.0),
        _relative_gap(left.var_y, right.var_y, 0.0),
        _relative_gap(left.cov_xy, right.cov_xy, cov_scale),
    )


def check_empirical_identity(sample: BivariateIntervalSample) -> float:
    likelihood_based = overall_estimates(sample, InternalModel.UNIFORM, 12)
    gap = max(
        moments_discrepancy(likelihood_based, empirical_stats(sample)),
        moments_discrepancy(overall_closed_form(sample, InternalModel.UNIFORM, 12), expanded_uniform_moments(sample)),
    )
    logger.debug("empirical identity discrepancy %.3e over n=%d", gap, sample.n)
    return gap


def _classical_cov(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.mean((u - u.mean()) * (v - v.mean())))


def center_range_stats(sample: BivariateIntervalSample) -> CenterRangeStats:
    """Classical statistics of centers and ranges next to the symbolic ones.

    Ranges are the full widths b - a.
    """
    e = sample.as_arrays()
    if e.n < 2:
        raise EmptySampleError(e.n)

    center_x, center_y = (e.c + e.d) / 2, (e.a + e.b) / 2
    range_x, range_y = e.d - e.c, e.b - e.a
    symbolic = empirical_stats(sample)

    def row(center: float, spread: float, value: float) -> CenterRangeRow:
        return CenterRangeRow(center, spread, center + spread, value)

    return CenterRangeStats(
        x=row(_classical_cov(center_x, center_x), _classical_cov(range_x, range_x), symbolic.var_x),
        y=row(_classical_cov(center_y, center_y), _classical_cov(range_y, range_y), symbolic.var_y),
        xy=row(_classical_cov(center_y, center_x), _classical_cov(range_y, range_x), symbolic.cov_xy),
    )


def interval_level_expectation(params: TauParams) -> VarianceParts:
    """Expected value of the divisor-12 overall estimators under interval-level generation."""
    factor = params.nu / UNIFORM_DIVISOR
    return VarianceParts(
        var_x=factor * params.gamma1 + params.sigma2_x,
        var_y=factor * params.gamma2 + params.sigma2_y,
        cov_xy=factor * params.gamma3 + params.sigma_xy,
    )
