from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Any, Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from errors import (
    EmptySampleError,
    InvalidIntervalError,
    InvalidParameterError,
    ModeOutOfRangeError,
    NonFiniteError,
)

logger = logging.getLogger(__name__)

DEFAULT_NU = 12


def require_finite(what: str, value: float) -> float:
    if not math.isfinite(value):
        raise NonFiniteError(what, value)
    return value


class Interval(BaseModel):
    """A closed interval [lower, upper]; lower == upper is a classical point."""

    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float

    @model_validator(mode="after")
    def _check_bounds(self) -> "Interval":
        require_finite("lower", self.lower)
        require_finite("upper", self.upper)
        if self.lower > self.upper:
            raise InvalidIntervalError(self.lower, self.upper)
        return self

    @property
    def midpoint(self) -> float:
        return (self.lower + self.upper) / 2

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def is_degenerate(self) -> bool:
        return self.lower == self.upper


class BivariateIntervalObs(BaseModel):
    """One observation: x = [c, d], y = [a, b] and optional Pert modes."""

    model_config = ConfigDict(frozen=True)

    x: Interval
    y: Interval
    mode_x: float | None = None
    mode_y: float | None = None

    @model_validator(mode="after")
    def _check_modes(self) -> "BivariateIntervalObs":
        for mode, interval in ((self.mode_x, self.x), (self.mode_y, self.y)):
            if mode is None:
                continue
            require_finite("mode", mode)
            if not interval.lower <= mode <= interval.upper:
                raise ModeOutOfRangeError(mode, interval.lower, interval.upper)
        return self


@dataclass(frozen=True)
class EndpointArrays:
    c: np.ndarray
    d: np.ndarray
    a: np.ndarray
    b: np.ndarray
    # NaN marks an absent mode
    mode_x: np.ndarray
    mode_y: np.ndarray

    @property
    def n(self) -> int:
        return len(self.c)


class BivariateIntervalSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    observations: tuple[BivariateIntervalObs, ...]

    @model_validator(mode="after")
    def _check_size(self) -> "BivariateIntervalSample":
        if len(self.observations) < 2:
            raise EmptySampleError(len(self.observations))
        return self

    @property
    def n(self) -> int:
        return len(self.observations)

    @property
    def has_modes(self) -> bool:
        return any(obs.mode_x is not None or obs.mode_y is not None for obs in self.observations)

    @property
    def is_classical(self) -> bool:
        return all(obs.x.is_degenerate and obs.y.is_degenerate for obs in self.observations)

    def as_arrays(self) -> EndpointArrays:
        def column(getter) -> np.ndarray:
            return np.array([getter(obs) for obs in self.observations], dtype=float)

        def mode(value: float | None) -> float:
            return math.nan if value is None else value

        return EndpointArrays(
            c=column(lambda o: o.x.lower),
            d=column(lambda o: o.x.upper),
            a=column(lambda o: o.y.lower),
            b=column(lambda o: o.y.upper),
            mode_x=column(lambda o: mode(o.mode_x)),
            mode_y=column(lambda o: mode(o.mode_y)),
        )

    @classmethod
    def from_arrays(cls, c: Iterable[float], d: Iterable[float], a: Iterable[float], b: Iterable[float]) -> "BivariateIntervalSample":
        return cls(observations=tuple(
            BivariateIntervalObs(x=Interval(lower=ci, upper=di), y=Interval(lower=ai, upper=bi))
            for ci, di, ai, bi in zip(c, d, a, b)
        ))


class InternalModel(str, Enum):
    """How micro-data are assumed to spread inside each interval."""

    UNIFORM = "uniform"
    TRIANGULAR = "triangular"
    PERT = "pert"


class TauParams(BaseModel):
    """Model parameters: bivariate normal means, bivariate Wishart variations."""

    model_config = ConfigDict(frozen=True)

    mu_x: float
    mu_y: float
    sigma2_x: float
    sigma2_y: float
    rho: float
    gamma1: float
    gamma2: float
    gamma3: float
    nu: int = DEFAULT_NU

    @model_validator(mode="after")
    def _check_domain(self) -> "TauParams":
        for name in ("mu_x", "mu_y", "sigma2_x", "sigma2_y", "rho", "gamma1", "gamma2", "gamma3"):
            require_finite(name, getattr(self, name))
        if self.sigma2_x <= 0:
            raise InvalidParameterError("sigma2_x", "must be positive")
        if self.sigma2_y <= 0:
            raise InvalidParameterError("sigma2_y", "must be positive")
        if not -1 < self.rho < 1:
            raise InvalidParameterError("rho", "must lie strictly inside (-1, 1)")
        if self.gamma1 <= 0:
            raise InvalidParameterError("gamma1", "must be positive")
        if self.gamma2 <= 0:
            raise InvalidParameterError("gamma2", "must be positive")
        if self.G <= 0:
            raise InvalidParameterError("gamma3", "gamma1*gamma2 - gamma3^2 must be positive")
        if self.nu <= 2:
            raise InvalidParameterError("nu", "degrees of freedom must exceed 2")
        return self

    @property
    def G(self) -> float:
        return self.gamma1 * self.gamma2 - self.gamma3 ** 2

    @property
    def sigma_x(self) -> float:
        return math.sqrt(self.sigma2_x)

    @property
    def sigma_y(self) -> float:
        return math.sqrt(self.sigma2_y)

    @property
    def sigma_xy(self) -> float:
        return self.rho * self.sigma_x * self.sigma_y

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mu_x, self.mu_y])

    @property
    def between_cov(self) -> np.ndarray:
        return np.array([[self.sigma2_x, self.sigma_xy], [self.sigma_xy, self.sigma2_y]])

    @property
    def gamma(self) -> np.ndarray:
        return np.array([[self.gamma1, self.gamma3], [self.gamma3, self.gamma2]])

    def replace(self, **changes: Any) -> "TauParams":
        # model_copy(update=...) would skip validation
        return TauParams(**{**self.model_dump(), **changes})

    @classmethod
    def from_covariance(cls, *, sigma_xy: float, sigma2_x: float, sigma2_y: float, **rest: Any) -> "TauParams":
        if sigma2_x <= 0 or sigma2_y <= 0:
            raise InvalidParameterError("sigma2", "variances must be positive")
        rho = sigma_xy / math.sqrt(sigma2_x * sigma2_y)
        return cls(sigma2_x=sigma2_x, sigma2_y=sigma2_y, rho=rho, **rest)


def validate_sample(raw: Sequence[Sequence[float | None]]) -> BivariateIntervalSample:
    """Builds a sample from rows of (c, d, a, b) or (c, d, a, b, mode_x, mode_y)."""

    if len(raw) < 2:
        raise EmptySampleError(len(raw))

    observations = []
    for index, row in enumerate(raw, start=1):
        if len(row) not in (4, 6):
            raise InvalidParameterError(f"row {index}", f"expected 4 or 6 values, got {len(row)}")
        c, d, a, b = (require_finite(f"row {index} endpoint", float(v)) for v in row[:4])
        mode_x = mode_y = None
        if len(row) == 6:
            mode_x = None if row[4] is None else float(row[4])
            mode_y = None if row[5] is None else float(row[5])
        observations.append(BivariateIntervalObs(
            x=Interval(lower=c, upper=d),
            y=Interval(lower=a, upper=b),
            mode_x=mode_x,
            mode_y=mode_y,
        ))

    logger.debug("validated %d interval observations", len(observations))
    return BivariateIntervalSample(observations=tuple(observations))
