import pytest

from asymptotics import (
    G_LABELS,
    asymptotic_variances,
    compare_to_reference,
    g_plugin,
    g_theoretical,
    plugin_variances,
    positive_design_effective_params,
    negative_design_params,
    wald_interval,
)
from datasets import load_reference_set
from errors import InvalidParameterError
from estimators import mle_params, overall_estimates
from intervals import InternalModel, TauParams, validate_sample
from simulator import generate_theta_sample, replication_rng

POSITIVE_DESIGN_LIMITS = (1, 4, 5, 3, 7.25, 33.76, 4.25, 18.26, 0, 16.67)
NEGATIVE_DESIGN_LIMITS = (-2, 1.5, 3, 2.5, 2.75, 4.76, 5, 13.54, -3.5, 7.328)


def positive_design_stated() -> TauParams:
    return TauParams.from_covariance(mu_x=1, mu_y=5, sigma2_x=4, sigma2_y=3, sigma_xy=2, gamma1=7, gamma2=5, gamma3=-2)


def test_negative_design_limits():
    assert tuple(g_theoretical(negative_design_params()).as_array()) == pytest.approx(NEGATIVE_DESIGN_LIMITS, rel=1e-3)


def test_negative_design_has_no_discrepancies():
    assert compare_to_reference(g_theoretical(negative_design_params()), NEGATIVE_DESIGN_LIMITS) == []


def test_positive_design_stated_parameters_disagree_with_reference_limits():
    gaps = compare_to_reference(g_theoretical(positive_design_stated()), POSITIVE_DESIGN_LIMITS)
    assert {gap.label for gap in gaps} == {"S2X", "nVar(S2X)", "S2Y", "nVar(S2Y)", "nVar(SXY)"}
    s2x = next(gap for gap in gaps if gap.label == "S2X")
    assert s2x.theoretical == pytest.approx(11)


def test_positive_design_effective_parameters_match_reference_limits():
    assert compare_to_reference(g_theoretical(positive_design_effective_params()), POSITIVE_DESIGN_LIMITS) == []


def test_reference_length_checked():
    with pytest.raises(InvalidParameterError):
        compare_to_reference(g_theoretical(negative_design_params()), (1, 2, 3))


def test_variances_scale_with_n():
    params = negative_design_params()
    at_100 = asymptotic_variances(params, 100)
    at_400 = asymptotic_variances(params, 400)
    assert at_100.var_mu_x == pytest.approx(0.015)
    assert at_400.var_SXY == pytest.approx(at_100.var_SXY / 4)
    assert at_100.var_gamma1 == pytest.approx(2 * 1.25 ** 2 / 1200)
    # correlation enters through sigma_xy^2 only
    assert at_100.var_sigma_xy == pytest.approx((1.5 * 2.5 + 1.75 ** 2) / 100)


def test_plugin_on_thetas_equals_theory_at_mle():
    thetas = generate_theta_sample(80, negative_design_params(), replication_rng(3, 80, 0))
    plug = g_plugin(thetas)
    theory = g_theoretical(mle_params(thetas))
    assert tuple(plug.as_array()) == pytest.approx(tuple(theory.as_array()), rel=1e-10)


def test_plugin_on_intervals_uses_overall_moments():
    sample = load_reference_set(2)
    plug = g_plugin(sample, InternalModel.UNIFORM, 12)
    overall = overall_estimates(sample)
    assert plug.s2x == pytest.approx(overall.var_x)
    assert plug.s2y == pytest.approx(overall.var_y)
    assert plug.sxy == pytest.approx(overall.cov_xy)
    assert plug.mu_x == pytest.approx(overall.mean_x)


def test_plugin_defined_without_between_correlation():
    sample = validate_sample([(0, 2, 1, 3), (0, 2, 5, 7), (0, 2, 2, 3)])
    plug = g_plugin(sample)
    assert plug.n_var_mu_x == 0
    assert plug.n_var_sxy >= 0


def test_plugin_variances_are_plugin_g_over_n():
    sample = load_reference_set(2)
    variances = plugin_variances(sample, InternalModel.UNIFORM, 12)
    plug = g_plugin(sample, InternalModel.UNIFORM, 12)
    assert variances.var_mu_x == pytest.approx(plug.n_var_mu_x / sample.n)
    assert variances.var_S2X == pytest.approx(plug.n_var_s2x / sample.n)
    assert variances.var_SXY == pytest.approx(plug.n_var_sxy / sample.n)


def test_plugin_variances_without_between_correlation():
    sample = validate_sample([(0, 2, 1, 3), (0, 2, 5, 7), (0, 2, 2, 3)])
    variances = plugin_variances(sample)
    assert variances.var_mu_x == 0
    assert variances.var_sigma2_x == 0
    assert variances.var_sigma_xy == 0
    assert variances.var_gamma1 > 0


def test_wald_interval():
    lower, upper = wald_interval(1.0, 0.25)
    assert lower == pytest.approx(1 - 1.959964 * 0.5, rel=1e-6)
    assert upper == pytest.approx(1 + 1.959964 * 0.5, rel=1e-6)
    with pytest.raises(InvalidParameterError):
        wald_interval(0.0, 1.0, level=1.5)


def test_labels_follow_table_layout():
    assert G_LABELS[0::2] == ("mu_x", "mu_y", "S2X", "S2Y", "SXY")
    assert list(g_theoretical(negative_design_params()).as_dict()) == list(G_LABELS)
