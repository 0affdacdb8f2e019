from dataclasses import astuple, dataclass, fields
import math
from typing import Sequence

import numpy as np
from scipy.stats import norm

from errors import InvalidParameterError
from estimators import BetweenEstimates, between_mles, overall_estimates, within_mles
from intervals import DEFAULT_NU, BivariateIntervalSample, InternalModel, TauParams
from internal_moments import ThetaArrays, realize_sample

G_LABELS = (
    "mu_x", "nVar(mu_x)",
    "mu_y", "nVar(mu_y)",
    "S2X", "nVar(S2X)",
    "S2Y", "nVar(S2Y)",
    "SXY", "nVar(SXY)",
)


@dataclass(frozen=True)
class AsymptoticReport:
    var_mu_x: float
    var_mu_y: float
    var_sigma2_x: float
    var_sigma2_y: float
    var_sigma_xy: float
    var_gamma1: float
    var_gamma2: float
    var_gamma3: float
    var_S2X: float
    var_S2Y: float
    var_SXY: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class GVector:
    """Estimator limits interleaved with n-scaled asymptotic variances."""

    mu_x: float
    n_var_mu_x: float
    mu_y: float
    n_var_mu_y: float
    s2x: float
    n_var_s2x: float
    s2y: float
    n_var_s2y: float
    sxy: float
    n_var_sxy: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def as_dict(self) -> dict[str, float]:
        return {label: float(value) for label, value in zip(G_LABELS, astuple(self))}


def _variance_terms(
    n: int, nu: int,
    sigma2_x: float, sigma2_y: float, sigma_xy: float,
    gamma1: float, gamma2: float, gamma3: float,
) -> AsymptoticReport:
    # (1 + rho^2) sigma_x^2 sigma_y^2 == sigma_x^2 sigma_y^2 + sigma_xy^2
    between_cross = sigma2_x * sigma2_y + sigma_xy ** 2
    within_cross = gamma1 * gamma2 + gamma3 ** 2
    return AsymptoticReport(
        var_mu_x=sigma2_x / n,
        var_mu_y=sigma2_y / n,
        var_sigma2_x=2 * sigma2_x ** 2 / n,
        var_sigma2_y=2 * sigma2_y ** 2 / n,
        var_sigma_xy=between_cross / n,
        var_gamma1=2 * gamma1 ** 2 / (nu * n),
        var_gamma2=2 * gamma2 ** 2 / (nu * n),
        var_gamma3=within_cross / (nu * n),
        var_S2X=2 * (gamma1 ** 2 + nu * sigma2_x ** 2) / (nu * n),
        var_S2Y=2 * (gamma2 ** 2 + nu * sigma2_y ** 2) / (nu * n),
        var_SXY=(within_cross + nu * between_cross) / (nu * n),
    )


def asymptotic_variances(params: TauParams, n: int) -> AsymptoticReport:
    if n < 1:
        raise InvalidParameterError("n", "sample size must be at least 1")
    return _variance_terms(
        n, params.nu,
        params.sigma2_x, params.sigma2_y, params.sigma_xy,
        params.gamma1, params.gamma2, params.gamma3,
    )


def _g_vector(
    nu: int,
    mu_x: float, mu_y: float,
    sigma2_x: float, sigma2_y: float, sigma_xy: float,
    gamma1: float, gamma2: float, gamma3: float,
) -> GVector:
    scaled = _variance_terms(1, nu, sigma2_x, sigma2_y, sigma_xy, gamma1, gamma2, gamma3)
    return GVector(
        mu_x=mu_x, n_var_mu_x=scaled.var_mu_x,
        mu_y=mu_y, n_var_mu_y=scaled.var_mu_y,
        s2x=gamma1 + sigma2_x, n_var_s2x=scaled.var_S2X,
        s2y=gamma2 + sigma2_y, n_var_s2y=scaled.var_S2Y,
        sxy=gamma3 + sigma_xy, n_var_sxy=scaled.var_SXY,
    )


def g_theoretical(params: TauParams) -> GVector:
    return _g_vector(
        params.nu, params.mu_x, params.mu_y,
        params.sigma2_x, params.sigma2_y, params.sigma_xy,
        params.gamma1, params.gamma2, params.gamma3,
    )


def _plugin_parts(data: BivariateIntervalSample | ThetaArrays, model: InternalModel, nu: int) -> tuple[BetweenEstimates, tuple[float, float, float]]:
    if isinstance(data, BivariateIntervalSample):
        between = between_mles(realize_sample(data, model))
        overall = overall_estimates(data, model, nu)
        return between, (overall.within.var_x, overall.within.var_y, overall.within.cov_xy)
    gammas = within_mles(data, nu)
    return between_mles(data), (gammas.gamma1_hat, gammas.gamma2_hat, gammas.gamma3_hat)


def g_plugin(data: BivariateIntervalSample | ThetaArrays, model: InternalModel = InternalModel.UNIFORM, nu: int = DEFAULT_NU) -> GVector:
    """Estimates with their plug-in asymptotic variances, n-scaled.

    The within component is whatever the overall estimator adds to the
    between variance, so that S2 = within + between as in the limit theorem.
    """
    between, within = _plugin_parts(data, model, nu)
    return _g_vector(
        int(nu), between.mu_x_hat, between.mu_y_hat,
        between.sigma2_x_hat, between.sigma2_y_hat, between.sigma_xy_hat,
        *within,
    )


def plugin_variances(data: BivariateIntervalSample | ThetaArrays, model: InternalModel = InternalModel.UNIFORM, nu: int = DEFAULT_NU) -> AsymptoticReport:
    """asymptotic_variances at the estimated parameters; defined even when rho is not."""
    between, within = _plugin_parts(data, model, nu)
    return _variance_terms(
        data.n, int(nu),
        between.sigma2_x_hat, between.sigma2_y_hat, between.sigma_xy_hat,
        *within,
    )


def wald_interval(estimate: float, variance: float, level: float = 0.95) -> tuple[float, float]:
    if not 0 < level < 1:
        raise InvalidParameterError("level", "confidence level must lie in (0, 1)")
    if variance < 0:
        raise InvalidParameterError("variance", "must be non-negative")
    half = float(norm.ppf(0.5 + level / 2)) * math.sqrt(variance)
    return estimate - half, estimate + half


def positive_design_effective_params() -> TauParams:
    """Positive-covariance design with the within scales that reproduce its reference limits."""
    return TauParams.from_covariance(
        mu_x=1, mu_y=5, sigma2_x=4, sigma2_y=3, sigma_xy=2,
        gamma1=3.25, gamma2=1.25, gamma3=-2, nu=12,
    )


@dataclass(frozen=True)
class ComponentDiscrepancy:
    label: str
    theoretical: float
    reference: float

    @property
    def relative(self) -> float:
        return abs(self.theoretical - self.reference) / max(abs(self.reference), 0.02)


def compare_to_reference(g: GVector, reference: Sequence[float], tolerance: float = 0.02) -> list[ComponentDiscrepancy]:
    """Components of g that disagree with a reference row beyond the tolerance."""
    if len(reference) != len(G_LABELS):
        raise InvalidParameterError("reference_g", f"expected {len(G_LABELS)} values, got {len(reference)}")
    return [
        gap for gap in (
            ComponentDiscrepancy(label, float(value), float(expected))
            for label, value, expected in zip(G_LABELS, g.as_array(), reference)
        )
        if gap.relative > tolerance
    ]


def negative_design_params() -> TauParams:
    return TauParams.from_covariance(
        mu_x=-2, mu_y=3, sigma2_x=1.5, sigma2_y=2.5, sigma_xy=-1.75,
        gamma1=1.25, gamma2=2.5, gamma3=-1.75, nu=12,
    )
