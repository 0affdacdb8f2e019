from pathlib import Path

import numpy as np
import pytest

from asymptotics import G_LABELS, negative_design_params
from errors import InvalidParameterError
from estimators import between_mles, within_mles
from interval_io import load_study_config
from intervals import TauParams
from simulator import (
    BitGeneratorName,
    GenerationLevel,
    StudyConfig,
    generate_interval_sample,
    generate_theta_sample,
    replication_rng,
    run_study,
    sample_bvn,
    sample_bvn_pair,
    sample_wishart,
)

NEGATIVE_DESIGN_LIMITS = np.array([-2, 1.5, 3, 2.5, 2.75, 4.76, 5, 13.54, -3.5, 7.328])
POSITIVE_DESIGN_LIMITS = np.array([1, 4, 5, 3, 7.25, 33.76, 4.25, 18.26, 0, 16.67])
STUDIES = Path(__file__).parent.parent / "studies"


def negative_design_config(**changes) -> StudyConfig:
    values = dict(params=negative_design_params(), sample_sizes=(50, 100, 500, 1000), replications=1000, seed=20210202, label="negative")
    values.update(changes)
    return StudyConfig(**values)


def test_wishart_moments():
    rng = replication_rng(1, 0, 0)
    w11, w22, w12 = sample_wishart(12, (1.25, 2.5, -1.75), rng, size=20000)
    assert w11.mean() == pytest.approx(12 * 1.25, abs=0.3)
    assert w22.mean() == pytest.approx(12 * 2.5, abs=0.6)
    assert w12.mean() == pytest.approx(12 * -1.75, abs=0.5)
    # Var(W11) = 2 nu gamma1^2
    assert w11.var() == pytest.approx(2 * 12 * 1.25 ** 2, rel=0.05)
    assert np.all(w11 * w22 - w12 ** 2 > 0)


def test_wishart_scalar_draw():
    draw = sample_wishart(12, (1.0, 1.0, 0.0), replication_rng(2, 0, 0))
    assert all(isinstance(value, float) for value in draw)


def test_wishart_rejects_singular_scale():
    with pytest.raises(InvalidParameterError):
        sample_wishart(12, (1.0, 1.0, 1.0), replication_rng(0, 0, 0))


def test_bvn_moments():
    params = negative_design_params()
    draws = sample_bvn(params, replication_rng(4, 0, 0), 40000)
    assert draws.mean(axis=0) == pytest.approx([-2, 3], abs=0.03)
    cov = np.cov(draws.T)
    assert cov[0, 0] == pytest.approx(1.5, rel=0.03)
    assert cov[1, 1] == pytest.approx(2.5, rel=0.03)
    assert cov[0, 1] == pytest.approx(-1.75, rel=0.03)
    x, y = sample_bvn_pair(params, replication_rng(4, 0, 1))
    assert isinstance(x, float) and isinstance(y, float)


def test_streams_are_reproducible_and_distinct():
    first = generate_theta_sample(10, negative_design_params(), replication_rng(5, 10, 3))
    again = generate_theta_sample(10, negative_design_params(), replication_rng(5, 10, 3))
    other = generate_theta_sample(10, negative_design_params(), replication_rng(5, 10, 4))
    assert np.array_equal(first.theta2_xy, again.theta2_xy)
    assert not np.array_equal(first.theta2_xy, other.theta2_xy)


def test_pcg64_stream():
    philox = replication_rng(5, 10, 3).standard_normal(3)
    pcg = replication_rng(5, 10, 3, BitGeneratorName.PCG64).standard_normal(3)
    assert not np.array_equal(philox, pcg)


def test_interval_generation():
    sample = generate_interval_sample(25, negative_design_params(), replication_rng(6, 25, 0))
    assert sample.n == 25
    assert not sample.is_classical
    ends = sample.as_arrays()
    assert np.all(ends.d >= ends.c)


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        negative_design_config(replications=0)
    with pytest.raises(InvalidParameterError):
        negative_design_config(sample_sizes=(1,))
    with pytest.raises(InvalidParameterError):
        StudyConfig.from_flat({"mu_x": 0, "mu_y": 0, "sigma2_x": 1, "sigma2_y": 1, "rho": 0.1, "sigma_xy": 0.1,
                               "gamma1": 1, "gamma2": 1, "gamma3": 0, "sample_sizes": [10], "replications": 1, "seed": 0})


def test_flat_roundtrip():
    config = negative_design_config()
    again = StudyConfig.from_flat(config.to_flat())
    assert again.params.sigma_xy == pytest.approx(-1.75)
    assert again.sample_sizes == config.sample_sizes


def test_single_replication_has_zero_spread():
    report = run_study(negative_design_config(sample_sizes=(20,), replications=1))
    assert np.all(report.sds() == 0)


def test_report_layout():
    report = run_study(negative_design_config(sample_sizes=(30, 60), replications=20))
    assert report.means().shape == (10, 2)
    frame = report.to_frame()
    assert len(frame) == 20
    assert list(frame["component"][:10]) == list(G_LABELS)
    assert report.to_dict()["cells"][1]["n"] == 60
    assert report.failures == 0
    assert report.notes == ()


def test_reports_independent_of_workers():
    serial = run_study(negative_design_config(sample_sizes=(40, 80), replications=12))
    parallel = run_study(negative_design_config(sample_sizes=(40, 80), replications=12, workers=2))
    assert np.array_equal(serial.means(), parallel.means())
    assert np.array_equal(serial.sds(), parallel.sds())
    assert serial.to_frame().to_csv() == parallel.to_frame().to_csv()


def test_reference_discrepancies_become_notes():
    stated = TauParams.from_covariance(mu_x=1, mu_y=5, sigma2_x=4, sigma2_y=3, sigma_xy=2, gamma1=7, gamma2=5, gamma3=-2)
    config = StudyConfig(params=stated, sample_sizes=(20,), replications=2, seed=1,
                         reference_g=(1, 4, 5, 3, 7.25, 33.76, 4.25, 18.26, 0, 16.67))
    report = run_study(config)
    assert len(report.notes) == 5
    assert any("S2X" in note for note in report.notes)


def test_interval_level_study_recovers_variances_but_not_negative_within_covariance():
    report = run_study(negative_design_config(sample_sizes=(500,), replications=200, generation_level=GenerationLevel.INTERVAL))
    means = report.cells[0].mean
    assert means.mu_x == pytest.approx(-2, abs=0.02)
    assert means.s2x == pytest.approx(2.75, abs=0.05)
    # widths only carry the Wishart diagonal, so the within covariance is never negative
    assert means.sxy > negative_design_params().sigma_xy
    assert means.sxy > report.theoretical.sxy


def test_progress_wrapper_sees_every_block():
    seen = []

    def progress(blocks):
        for block in blocks:
            seen.append(block[0])
            yield block

    run_study(negative_design_config(sample_sizes=(20, 30), replications=8), progress)
    assert set(seen) == {20, 30}


@pytest.mark.slow
def test_negative_design_reproduction():
    report = run_study(negative_design_config())
    means, sds = report.means(), report.sds()
    for column, n in enumerate(report.sample_sizes):
        # the divisor-n plug-in nVar(mu_x) = sigma2_x_hat is low by (n - 1) / n at small n
        if n < 500:
            continue
        gap = np.abs(means[:, column] - NEGATIVE_DESIGN_LIMITS) / np.maximum(np.abs(NEGATIVE_DESIGN_LIMITS), 0.02)
        assert gap.max() <= 0.02, (n, gap)
    assert np.all(np.diff(sds, axis=1) < 0)


@pytest.mark.slow
def test_statistics_are_asymptotically_normal_with_stated_variance():
    report = run_study(negative_design_config(sample_sizes=(500,), replications=2000))
    theory = report.theoretical.as_array()
    sds = report.sds()[:, 0]
    for index in (0, 2, 4, 6, 8):
        assert sds[index] * np.sqrt(500) == pytest.approx(np.sqrt(theory[index + 1]), rel=0.07)


@pytest.mark.slow
def test_positive_design_effective_parameters_reproduce_reference_row():
    flat = load_study_config(STUDIES / "positive_effective.yml").to_flat()
    config = StudyConfig.from_flat({**flat, "sample_sizes": [500, 1000]})
    report = run_study(config)
    assert report.notes == ()
    means, sds = report.means(), report.sds()
    for column in range(len(config.sample_sizes)):
        # zero limits are judged against the Monte-Carlo error of the mean
        tolerance = np.maximum(0.02 * np.abs(POSITIVE_DESIGN_LIMITS), 4 * sds[:, column] / np.sqrt(config.replications))
        assert np.all(np.abs(means[:, column] - POSITIVE_DESIGN_LIMITS) <= tolerance), means[:, column]


@pytest.mark.slow
def test_scaled_errors_have_limiting_variances():
    params, n, replications = negative_design_params(), 500, 2000
    nu = params.nu
    errors = {"sigma2_x": [], "gamma1": [], "gamma3": []}
    for replication in range(replications):
        thetas = generate_theta_sample(n, params, replication_rng(11, n, replication))
        between, within = between_mles(thetas), within_mles(thetas, nu)
        errors["sigma2_x"].append(np.sqrt(n) * (between.sigma2_x_hat - params.sigma2_x))
        errors["gamma1"].append(np.sqrt(nu * n) * (within.gamma1_hat - params.gamma1))
        errors["gamma3"].append(np.sqrt(nu * n) * (within.gamma3_hat - params.gamma3))

    assert np.var(errors["sigma2_x"]) == pytest.approx(2 * params.sigma2_x ** 2, rel=0.1)
    assert np.var(errors["gamma1"]) == pytest.approx(2 * params.gamma1 ** 2, rel=0.1)
    assert np.var(errors["gamma3"]) == pytest.approx(params.gamma1 * params.gamma2 + params.gamma3 ** 2, rel=0.1)
    assert abs(np.mean(errors["gamma3"])) < 0.2
