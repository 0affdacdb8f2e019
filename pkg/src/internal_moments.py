from dataclasses import dataclass
import logging
import math
from typing import Sequence

import numpy as np

from errors import InvalidParameterError
from intervals import BivariateIntervalObs, BivariateIntervalSample, InternalModel

logger = logging.getLogger(__name__)

UNIFORM_DIVISOR = 12.0
TRIANGULAR_DIVISOR = 24.0
PERT_DIVISOR = 7.0
PERT_CROSS_DIVISOR = 14.0


@dataclass(frozen=True)
class ThetaRealization:
    theta1_x: float
    theta1_y: float
    theta2_x: float
    theta2_y: float
    theta2_xy: float

    def __post_init__(self):
        for name in ("theta1_x", "theta1_y", "theta2_x", "theta2_y", "theta2_xy"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(name, "must be finite")
        if self.theta2_x < 0 or self.theta2_y < 0:
            raise InvalidParameterError("theta2", "internal variances must be non-negative")

    @property
    def in_support_closure(self) -> bool:
        bound = self.theta2_x * self.theta2_y
        return self.theta2_xy ** 2 <= bound * (1 + 1e-12)


@dataclass(frozen=True)
class ThetaArrays:
    theta1_x: np.ndarray
    theta1_y: np.ndarray
    theta2_x: np.ndarray
    theta2_y: np.ndarray
    theta2_xy: np.ndarray

    @property
    def n(self) -> int:
        return len(self.theta1_x)

    @property
    def theta1(self) -> np.ndarray:
        return np.column_stack([self.theta1_x, self.theta1_y])

    def realizations(self) -> list[ThetaRealization]:
        return [
            ThetaRealization(*(float(v) for v in row))
            for row in zip(self.theta1_x, self.theta1_y, self.theta2_x, self.theta2_y, self.theta2_xy)
        ]

    def permuted(self, order: Sequence[int]) -> "ThetaArrays":
        index = np.asarray(order)
        return ThetaArrays(*(column[index] for column in self._columns()))

    def _columns(self) -> tuple[np.ndarray, ...]:
        return (self.theta1_x, self.theta1_y, self.theta2_x, self.theta2_y, self.theta2_xy)

    @classmethod
    def from_realizations(cls, thetas: Sequence[ThetaRealization]) -> "ThetaArrays":
        return cls(
            theta1_x=np.array([t.theta1_x for t in thetas], dtype=float),
            theta1_y=np.array([t.theta1_y for t in thetas], dtype=float),
            theta2_x=np.array([t.theta2_x for t in thetas], dtype=float),
            theta2_y=np.array([t.theta2_y for t in thetas], dtype=float),
            theta2_xy=np.array([t.theta2_xy for t in thetas], dtype=float),
        )


ThetaInput = ThetaArrays | Sequence[ThetaRealization]


def as_theta_arrays(thetas: ThetaInput) -> ThetaArrays:
    if isinstance(thetas, ThetaArrays):
        return thetas
    return ThetaArrays.from_realizations(thetas)


# Kernels accept floats or equally shaped arrays.

def _scaled_product_theta(c, d, a, b, divisor: float):
    width_x = d - c
    width_y = b - a
    return (
        (c + d) / 2,
        (a + b) / 2,
        width_x ** 2 / divisor,
        width_y ** 2 / divisor,
        width_x * width_y / divisor,
    )


def _pert_theta(c, d, a, b, mode_x, mode_y):
    mean_x = (c + 4 * mode_x + d) / 6
    mean_y = (a + 4 * mode_y + b) / 6
    return (
        mean_x,
        mean_y,
        (mean_x - c) * (d - mean_x) / PERT_DIVISOR,
        (mean_y - a) * (b - mean_y) / PERT_DIVISOR,
        ((mean_x - c) * (b - mean_y) + (mean_y - a) * (d - mean_x)) / PERT_CROSS_DIVISOR,
    )


def realize_uniform(obs: BivariateIntervalObs) -> ThetaRealization:
    return ThetaRealization(*_scaled_product_theta(obs.x.lower, obs.x.upper, obs.y.lower, obs.y.upper, UNIFORM_DIVISOR))


def realize_triangular(obs: BivariateIntervalObs) -> ThetaRealization:
    # peak fixed at the midpoint
    return ThetaRealization(*_scaled_product_theta(obs.x.lower, obs.x.upper, obs.y.lower, obs.y.upper, TRIANGULAR_DIVISOR))


def realize_pert(obs: BivariateIntervalObs) -> ThetaRealization:
    mode_x = obs.x.midpoint if obs.mode_x is None else obs.mode_x
    mode_y = obs.y.midpoint if obs.mode_y is None else obs.mode_y
    return ThetaRealization(*_pert_theta(obs.x.lower, obs.x.upper, obs.y.lower, obs.y.upper, mode_x, mode_y))


def realize(obs: BivariateIntervalObs, model: InternalModel) -> ThetaRealization:
    match model:
        case InternalModel.UNIFORM:
            return realize_uniform(obs)
        case InternalModel.TRIANGULAR:
            return realize_triangular(obs)
        case InternalModel.PERT:
            return realize_pert(obs)
    raise InvalidParameterError("model", f"unknown internal model {model}")


def realize_sample(sample: BivariateIntervalSample, model: InternalModel) -> ThetaArrays:
    ends = sample.as_arrays()
    match model:
        case InternalModel.UNIFORM:
            return ThetaArrays(*_scaled_product_theta(ends.c, ends.d, ends.a, ends.b, UNIFORM_DIVISOR))
        case InternalModel.TRIANGULAR:
            return ThetaArrays(*_scaled_product_theta(ends.c, ends.d, ends.a, ends.b, TRIANGULAR_DIVISOR))
        case InternalModel.PERT:
            missing = np.isnan(ends.mode_x) | np.isnan(ends.mode_y)
            if missing.any():
                logger.info("pert: %d of %d observations use midpoint modes", int(missing.sum()), ends.n)
            mode_x = np.where(np.isnan(ends.mode_x), (ends.c + ends.d) / 2, ends.mode_x)
            mode_y = np.where(np.isnan(ends.mode_y), (ends.a + ends.b) / 2, ends.mode_y)
            return ThetaArrays(*_pert_theta(ends.c, ends.d, ends.a, ends.b, mode_x, mode_y))
    raise InvalidParameterError("model", f"unknown internal model {model}")
