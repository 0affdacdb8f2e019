from dataclasses import dataclass
import itertools
import logging
import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from errors import (
    EmptySampleError,
    InvalidParameterError,
    NoConvergenceError,
    NonFiniteError,
    NotSymmetricError,
    RaggedSampleError,
    TooManyVerticesError,
)
from estimators import overall_estimates
from intervals import DEFAULT_NU, BivariateIntervalObs, BivariateIntervalSample, InternalModel, Interval

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-12
MAX_SWEEPS = 100
MAX_ENUMERATED_VARIABLES = 20


class MultivariateIntervalSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    variables: tuple[str, ...]
    observations: tuple[tuple[Interval, ...], ...]
    modes: tuple[tuple[float | None, ...], ...] | None = None
    ids: tuple[str, ...] | None = None

    @model_validator(mode="after")
    def _check_shape(self) -> "MultivariateIntervalSample":
        p = len(self.variables)
        if p < 2:
            raise InvalidParameterError("variables", f"at least 2 interval variables are required, got {p}")
        if len(self.observations) < 2:
            raise EmptySampleError(len(self.observations))
        for row, intervals in enumerate(self.observations, start=1):
            if len(intervals) != p:
                raise RaggedSampleError(row, p, len(intervals))
        if self.modes is not None:
            if len(self.modes) != len(self.observations):
                raise InvalidParameterError("modes", "one mode row per observation is required")
            for row, modes in enumerate(self.modes, start=1):
                if len(modes) != p:
                    raise RaggedSampleError(row, p, len(modes))
        if self.ids is not None and len(self.ids) != len(self.observations):
            raise InvalidParameterError("ids", "one identifier per observation is required")
        return self

    @property
    def p(self) -> int:
        return len(self.variables)

    @property
    def n(self) -> int:
        return len(self.observations)

    @property
    def labels(self) -> tuple[str, ...]:
        if self.ids is not None:
            return self.ids
        return tuple(str(i) for i in range(1, self.n + 1))

    def lower(self) -> np.ndarray:
        return np.array([[iv.lower for iv in row] for row in self.observations], dtype=float)

    def upper(self) -> np.ndarray:
        return np.array([[iv.upper for iv in row] for row in self.observations], dtype=float)

    def _mode(self, row: int, column: int) -> float | None:
        return None if self.modes is None else self.modes[row][column]

    def pair(self, j: int, k: int) -> BivariateIntervalSample:
        """Variables j and k as a bivariate sample, j on the x axis."""
        return BivariateIntervalSample(observations=tuple(
            BivariateIntervalObs(x=row[j], y=row[k], mode_x=self._mode(i, j), mode_y=self._mode(i, k))
            for i, row in enumerate(self.observations)
        ))

    @classmethod
    def from_bounds(cls, lower: np.ndarray, upper: np.ndarray, variables: Sequence[str] | None = None) -> "MultivariateIntervalSample":
        lower, upper = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
        if variables is None:
            variables = [f"V{j + 1}" for j in range(lower.shape[1])]
        return cls(
            variables=tuple(variables),
            observations=tuple(
                tuple(Interval(lower=float(lo), upper=float(hi)) for lo, hi in zip(row_lo, row_hi))
                for row_lo, row_hi in zip(lower, upper)
            ),
        )


@dataclass(frozen=True)
class PcIntervals:
    lower: np.ndarray
    upper: np.ndarray

    def interval(self, observation: int, component: int) -> Interval:
        return Interval(lower=float(self.lower[observation, component]), upper=float(self.upper[observation, component]))


@dataclass(frozen=True)
class PcResult:
    variables: tuple[str, ...]
    covariance: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    means: np.ndarray
    scales: np.ndarray
    pc_intervals: PcIntervals
    correlation: bool = False

    @property
    def inertia(self) -> np.ndarray:
        """Share of the total symbolic variance carried by each component."""
        total = float(np.sum(self.eigenvalues))
        if total <= 0:
            return np.full(len(self.eigenvalues), math.nan)
        return self.eigenvalues / total

    def summary(self) -> dict:
        return {
            "variables": list(self.variables),
            "correlation": self.correlation,
            "eigenvalues": self.eigenvalues.tolist(),
            "inertia": self.inertia.tolist(),
            "eigenvectors": self.eigenvectors.tolist(),
            "means": self.means.tolist(),
            "matrix": self.covariance.tolist(),
        }


def symbolic_cov_matrix(sample: MultivariateIntervalSample, model: InternalModel = InternalModel.UNIFORM, nu: int = DEFAULT_NU) -> np.ndarray:
    p = sample.p
    matrix = np.empty((p, p))
    for j in range(p):
        matrix[j, j] = overall_estimates(sample.pair(j, j), model, nu).var_x
        for k in range(j + 1, p):
            matrix[j, k] = matrix[k, j] = overall_estimates(sample.pair(j, k), model, nu).cov_xy
    return matrix


def variable_means(sample: MultivariateIntervalSample, model: InternalModel = InternalModel.UNIFORM, nu: int = DEFAULT_NU) -> np.ndarray:
    return np.array([overall_estimates(sample.pair(j, j), model, nu).mean_x for j in range(sample.p)])


def _check_symmetric(S: np.ndarray) -> np.ndarray:
    S = np.array(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidParameterError("S", f"a square matrix is required, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NonFiniteError("matrix entry", float(S[~np.isfinite(S)][0]))
    asymmetry = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if asymmetry > JACOBI_TOLERANCE * max(1.0, float(np.max(np.abs(S)))):
        raise NotSymmetricError(asymmetry)
    return (S + S.T) / 2


def _off_diagonal(A: np.ndarray) -> float:
    off = np.abs(A - np.diag(np.diag(A)))
    return float(off.max()) if off.size else 0.0


def _rotate(A: np.ndarray, V: np.ndarray, k: int, l: int):
    """Zeroes A[k, l] with one Jacobi rotation, in place."""
    a_kl = A[k, l]
    diff = A[l, l] - A[k, k]
    if abs(a_kl) < abs(diff) * 1.0e-36:
        t = a_kl / diff
    else:
        phi = diff / (2.0 * a_kl)
        t = 1.0 / (abs(phi) + math.sqrt(phi ** 2 + 1.0))
        if phi < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t ** 2 + 1.0)
    s = t * c

    col_k, col_l = A[:, k].copy(), A[:, l].copy()
    A[:, k] = c * col_k - s * col_l
    A[:, l] = s * col_k + c * col_l
    row_k, row_l = A[k, :].copy(), A[l, :].copy()
    A[k, :] = c * row_k - s * row_l
    A[l, :] = s * row_k + c * row_l
    A[k, l] = A[l, k] = 0.0

    vec_k, vec_l = V[:, k].copy(), V[:, l].copy()
    V[:, k] = c * vec_k - s * vec_l
    V[:, l] = s * vec_k + c * vec_l


def _orient(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each eigenvector is positive
    for j in range(vectors.shape[1]):
        pivot = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[pivot, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return vectors


def jacobi_eigen(S: np.ndarray, max_sweeps: int = MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix."""
    A = _check_symmetric(S)
    p = A.shape[0]
    V = np.identity(p)
    threshold = JACOBI_TOLERANCE * (float(np.max(np.abs(A))) if A.size else 0.0)

    sweeps = 0
    off = _off_diagonal(A)
    while off >= threshold and off > 0:
        if sweeps == max_sweeps:
            raise NoConvergenceError(sweeps, off)
        for k in range(p - 1):
            for l in range(k + 1, p):
                if A[k, l] != 0.0:
                    _rotate(A, V, k, l)
        sweeps += 1
        off = _off_diagonal(A)
    logger.debug("jacobi: p=%d converged after %d sweeps", p, sweeps)

    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], _orient(V[:, order])


def _centered_bounds(sample: MultivariateIntervalSample, means: np.ndarray, scales: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    lower = sample.lower() - means
    upper = sample.upper() - means
    if scales is not None:
        lower, upper = lower / scales, upper / scales
    return lower, upper


def project_intervals(
    sample: MultivariateIntervalSample,
    eigenvectors: np.ndarray,
    means: np.ndarray,
    scales: np.ndarray | None = None,
) -> PcIntervals:
    """Range of each observation's hyper-rectangle along every component.

    A linear form attains its extremes at corners, so each loading simply picks
    the lower or upper endpoint according to its sign.
    """
    lower, upper = _centered_bounds(sample, np.asarray(means), scales)
    positive = np.clip(eigenvectors, 0, None)
    negative = np.clip(eigenvectors, None, 0)
    return PcIntervals(
        lower=lower @ positive + upper @ negative,
        upper=upper @ positive + lower @ negative,
    )


def project_vertices(
    sample: MultivariateIntervalSample,
    eigenvectors: np.ndarray,
    means: np.ndarray,
    scales: np.ndarray | None = None,
) -> PcIntervals:
    """Brute-force projection of all 2^p corners."""
    if sample.p > MAX_ENUMERATED_VARIABLES:
        raise TooManyVerticesError(sample.p, MAX_ENUMERATED_VARIABLES)
    lower, upper = _centered_bounds(sample, np.asarray(means), scales)
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=sample.p)))
    out_lo = np.empty((sample.n, eigenvectors.shape[1]))
    out_hi = np.empty_like(out_lo)
    for i in range(sample.n):
        vertices = lower[i] + corners * (upper[i] - lower[i])
        scores = vertices @ eigenvectors
        out_lo[i] = scores.min(axis=0)
        out_hi[i] = scores.max(axis=0)
    return PcIntervals(lower=out_lo, upper=out_hi)


def to_correlation(S: np.ndarray, variables: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    scales = np.sqrt(np.diag(S))
    flat = np.flatnonzero(scales == 0)
    if flat.size:
        raise InvalidParameterError("correlation", f"variable {variables[flat[0]]} has zero symbolic variance")
    return S / np.outer(scales, scales), scales


def run_pca(
    sample: MultivariateIntervalSample,
    model: InternalModel = InternalModel.UNIFORM,
    nu: int = DEFAULT_NU,
    correlation: bool = False,
) -> PcResult:
    logger.info("pca: n=%d, p=%d, model=%s, correlation=%s", sample.n, sample.p, model.value, correlation)
    covariance = symbolic_cov_matrix(sample, model, nu)
    means = variable_means(sample, model, nu)
    scales = None
    matrix = covariance
    if correlation:
        matrix, scales = to_correlation(covariance, sample.variables)

    eigenvalues, eigenvectors = jacobi_eigen(matrix)
    return PcResult(
        variables=sample.variables,
        covariance=matrix,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        means=means,
        scales=np.ones(sample.p) if scales is None else scales,
        pc_intervals=project_intervals(sample, eigenvectors, means, scales),
        correlation=correlation,
    )
