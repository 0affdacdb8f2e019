from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import Any, Callable, Iterable, Iterator

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from asymptotics import G_LABELS, GVector, compare_to_reference, g_plugin, g_theoretical
from errors import InvalidParameterError, NumericalFailure, ValidationFailure
from intervals import DEFAULT_NU, BivariateIntervalSample, InternalModel, TauParams
from internal_moments import ThetaArrays

logger = logging.getLogger(__name__)


class GenerationLevel(str, Enum):
    THETA = "theta"
    INTERVAL = "interval"


class BitGeneratorName(str, Enum):
    PHILOX = "philox"
    PCG64 = "pcg64"


PARAM_KEYS = ("mu_x", "mu_y", "sigma2_x", "sigma2_y", "gamma1", "gamma2", "gamma3", "nu")


class StudyConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    params: TauParams
    sample_sizes: tuple[int, ...]
    replications: int
    seed: int = Field(ge=0, lt=2 ** 64)
    generation_level: GenerationLevel = GenerationLevel.THETA
    bit_generator: BitGeneratorName = BitGeneratorName.PHILOX
    workers: int = 1
    label: str = "study"
    reference_g: tuple[float, ...] | None = None

    @model_validator(mode="after")
    def _check_design(self) -> "StudyConfig":
        if self.replications < 1:
            raise InvalidParameterError("replications", "B must be at least 1")
        if not self.sample_sizes:
            raise InvalidParameterError("sample_sizes", "at least one sample size is required")
        if any(n < 2 for n in self.sample_sizes):
            raise InvalidParameterError("sample_sizes", "every sample size must be at least 2")
        if self.workers < 1:
            raise InvalidParameterError("workers", "must be at least 1")
        return self

    @classmethod
    def from_flat(cls, data: dict[str, Any]) -> "StudyConfig":
        """Builds a config from a flat mapping carrying either rho or sigma_xy."""
        values = dict(data)
        has_rho, has_cov = "rho" in values, "sigma_xy" in values
        if has_rho == has_cov:
            raise InvalidParameterError("rho", "give exactly one of rho and sigma_xy")
        missing = [key for key in PARAM_KEYS if key not in values and key != "nu"]
        if missing:
            raise InvalidParameterError(missing[0], "missing from study configuration")

        tau = {key: values.pop(key) for key in PARAM_KEYS if key in values}
        tau.setdefault("nu", DEFAULT_NU)
        if has_cov:
            params = TauParams.from_covariance(sigma_xy=values.pop("sigma_xy"), **tau)
        else:
            params = TauParams(rho=values.pop("rho"), **tau)
        return cls(params=params, **values)

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = {key: getattr(self.params, key) for key in PARAM_KEYS}
        flat["rho"] = self.params.rho
        flat.update(
            sample_sizes=list(self.sample_sizes),
            replications=self.replications,
            seed=self.seed,
            generation_level=self.generation_level.value,
            bit_generator=self.bit_generator.value,
            workers=self.workers,
            label=self.label,
        )
        if self.reference_g is not None:
            flat["reference_g"] = list(self.reference_g)
        return flat


@dataclass(frozen=True)
class StudyCell:
    n: int
    mean: GVector
    sd: GVector


@dataclass(frozen=True)
class StudyReport:
    config: StudyConfig
    cells: tuple[StudyCell, ...]
    theoretical: GVector
    failures: int = 0
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def sample_sizes(self) -> tuple[int, ...]:
        return tuple(cell.n for cell in self.cells)

    def means(self) -> np.ndarray:
        """Component means, shape (10, number of sample sizes)."""
        return np.column_stack([cell.mean.as_array() for cell in self.cells])

    def sds(self) -> np.ndarray:
        return np.column_stack([cell.sd.as_array() for cell in self.cells])

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "n": cell.n,
                "component": label,
                "theoretical": theory,
                "mean": mean,
                "sd": sd,
            }
            for cell in self.cells
            for label, theory, mean, sd in zip(G_LABELS, self.theoretical.as_array(), cell.mean.as_array(), cell.sd.as_array())
        ]
        return pd.DataFrame(rows, columns=["n", "component", "theoretical", "mean", "sd"])

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config.to_flat(),
            "theoretical": self.theoretical.as_dict(),
            "cells": [
                {"n": cell.n, "mean": cell.mean.as_dict(), "sd": cell.sd.as_dict()}
                for cell in self.cells
            ],
            "failures": self.failures,
            "notes": list(self.notes),
        }


def replication_rng(seed: int, n: int, replication: int, bit_generator: BitGeneratorName = BitGeneratorName.PHILOX) -> np.random.Generator:
    sequence = np.random.SeedSequence(seed, spawn_key=(n, replication))
    match bit_generator:
        case BitGeneratorName.PHILOX:
            return np.random.Generator(np.random.Philox(sequence))
        case BitGeneratorName.PCG64:
            return np.random.Generator(np.random.PCG64(sequence))
    raise InvalidParameterError("bit_generator", f"unknown generator {bit_generator}")


def sample_bvn(params: TauParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draws of (theta1_x, theta1_y), shape (size, 2)."""
    lower = np.linalg.cholesky(params.between_cov)
    return params.mean + rng.standard_normal((size, 2)) @ lower.T


def sample_bvn_pair(params: TauParams, rng: np.random.Generator) -> tuple[float, float]:
    x, y = sample_bvn(params, rng, 1)[0]
    return float(x), float(y)


def _scale_factor(gamma: tuple[float, float, float]) -> np.ndarray:
    g1, g2, g3 = gamma
    if g1 <= 0 or g2 <= 0 or g1 * g2 - g3 ** 2 <= 0:
        raise InvalidParameterError("gamma", "Wishart scale must be positive definite")
    return np.linalg.cholesky(np.array([[g1, g3], [g3, g2]]))


def sample_wishart(nu: int, gamma: tuple[float, float, float], rng: np.random.Generator, size: int | None = None):
    """Sum of nu outer products of N(0, Gamma) vectors; returns (w11, w22, w12).

    Scalars when size is None, otherwise arrays of length size.
    """
    if int(nu) != nu or nu < 2:
        raise InvalidParameterError("nu", "integer degrees of freedom of at least 2 are required")
    lower = _scale_factor(gamma)
    count = 1 if size is None else size
    z = rng.standard_normal((count, int(nu), 2)) @ lower.T
    w11 = np.sum(z[..., 0] ** 2, axis=1)
    w22 = np.sum(z[..., 1] ** 2, axis=1)
    w12 = np.sum(z[..., 0] * z[..., 1], axis=1)
    if size is None:
        return float(w11[0]), float(w22[0]), float(w12[0])
    return w11, w22, w12


def _gamma_of(params: TauParams) -> tuple[float, float, float]:
    return params.gamma1, params.gamma2, params.gamma3


def generate_theta_sample(n: int, params: TauParams, rng: np.random.Generator) -> ThetaArrays:
    theta1 = sample_bvn(params, rng, n)
    w11, w22, w12 = sample_wishart(params.nu, _gamma_of(params), rng, size=n)
    return ThetaArrays(theta1[:, 0], theta1[:, 1], w11, w22, w12)


def generate_interval_sample(n: int, params: TauParams, rng: np.random.Generator) -> BivariateIntervalSample:
    """Intervals centred at normal draws with widths sqrt(r1), sqrt(r2) from a Wishart diagonal."""
    centers = sample_bvn(params, rng, n)
    r1, r2, _ = sample_wishart(params.nu, _gamma_of(params), rng, size=n)
    half_x, half_y = np.sqrt(r1) / 2, np.sqrt(r2) / 2
    return BivariateIntervalSample.from_arrays(
        c=centers[:, 0] - half_x,
        d=centers[:, 0] + half_x,
        a=centers[:, 1] - half_y,
        b=centers[:, 1] + half_y,
    )


def replicate(config: StudyConfig, n: int, replication: int) -> np.ndarray:
    """One replication: generate, estimate, plug in. NaNs mark a failed replication."""
    rng = replication_rng(config.seed, n, replication, config.bit_generator)
    params = config.params
    try:
        if config.generation_level is GenerationLevel.THETA:
            g = g_plugin(generate_theta_sample(n, params, rng), nu=params.nu)
        else:
            g = g_plugin(generate_interval_sample(n, params, rng), InternalModel.UNIFORM, params.nu)
    except (NumericalFailure, ValidationFailure) as e:
        logger.warning("replication %d at n=%d failed: %s", replication, n, e)
        return np.full(len(G_LABELS), math.nan)
    return g.as_array()


def _replicate_block(config: StudyConfig, n: int, start: int, stop: int) -> np.ndarray:
    return np.vstack([replicate(config, n, r) for r in range(start, stop)])


def _blocks(config: StudyConfig, n: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(config.replications / (4 * config.workers)))
    return [(start, min(start + size, config.replications)) for start in range(0, config.replications, size)]


def iter_replication_blocks(config: StudyConfig) -> Iterator[tuple[int, int, np.ndarray]]:
    """Yields (n, start, values) blocks in a fixed order regardless of worker count."""
    jobs = [(n, start, stop) for n in config.sample_sizes for start, stop in _blocks(config, n)]
    if config.workers == 1:
        for n, start, stop in jobs:
            yield n, start, _replicate_block(config, n, start, stop)
        return

    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(_replicate_block, config, n, start, stop) for n, start, stop in jobs]
        for (n, start, _), future in zip(jobs, futures):
            yield n, start, future.result()


def block_count(config: StudyConfig) -> int:
    return sum(len(_blocks(config, n)) for n in config.sample_sizes)


def run_study(config: StudyConfig, progress: Callable[[Iterable], Iterable] | None = None) -> StudyReport:
    logger.info(
        "study %s: B=%d, n=%s, level=%s, seed=%d",
        config.label, config.replications, list(config.sample_sizes), config.generation_level.value, config.seed,
    )
    results = {n: np.empty((config.replications, len(G_LABELS))) for n in config.sample_sizes}
    blocks: Iterable = iter_replication_blocks(config)
    if progress is not None:
        blocks = progress(blocks)
    for n, start, values in blocks:
        results[n][start:start + len(values)] = values

    failures = 0
    cells = []
    for n in config.sample_sizes:
        values = results[n]
        failed = np.isnan(values).any(axis=1)
        failures += int(failed.sum())
        kept = values[~failed]
        ddof = 1 if len(kept) > 1 else 0
        cells.append(StudyCell(
            n=n,
            mean=GVector(*np.mean(kept, axis=0)) if len(kept) else GVector(*values[0]),
            sd=GVector(*np.std(kept, axis=0, ddof=ddof)) if len(kept) else GVector(*values[0]),
        ))

    theoretical = g_theoretical(config.params)
    notes = []
    if config.reference_g is not None:
        for gap in compare_to_reference(theoretical, config.reference_g):
            notes.append(
                f"reference {gap.label} = {gap.reference:g} is inconsistent with the stated parameters "
                f"(theoretical {gap.theoretical:.6g})"
            )
    if failures:
        notes.append(f"{failures} replications failed")
    return StudyReport(config=config, cells=tuple(cells), theoretical=theoretical, failures=failures, notes=tuple(notes))
