#!/usr/bin/env python3
"""
Weighted relative errors, error reduction, consistency statistics and the
IwC error decomposition
"""

import itertools
import warnings
from types import SimpleNamespace

import numpy as np
import pytest

from data import split_train_test
from dgp import DgpConfig, gen_dataset
from errors import (
    AllTrueEffectsZero,
    ConfigError,
    DivisionByZeroErr,
    DomainError,
    EmptyTreatedGroup,
    InsufficientRepetitions,
    ZeroDenominator,
)
from estimators import EstimateReport, FamilyEstimates, NuisanceBundle
from learners import (
    CallableOutcomeModel,
    CallablePropensityModel,
    OutcomeModelSpec,
    fit_outcome_model,
    fit_propensity,
)
from metrics import (
    ExperimentSeries,
    consistency_curve,
    consistency_mean,
    consistency_std,
    decompose_iwc_error,
    decompose_iwc_error_conditional,
    error_reduction,
    weighted_ate_error,
    weighted_rel_err_ate,
    weighted_rel_err_atte,
)


def _report(theta, conditional, true_theta, true_conditional, family="IwC"):
    n = len(theta)
    return EstimateReport(
        levels=[float(k) for k in range(n)],
        n_eval=100,
        level_counts=[100 // n] * n,
        families={family: FamilyEstimates.compose(theta, conditional)},
        truth=FamilyEstimates.compose(true_theta, true_conditional),
    )


def _diag(theta):
    """Conditional matrix equal to θ^i in every column"""
    return [[t] * len(theta) for t in theta]


# --- weighted relative error -------------------------------------------------

def _loop_ate_error(theta_hat, theta):
    n = len(theta)
    pairs = [(i, k) for i in range(n) for k in range(n) if i != k]
    total = sum(abs(theta[i] - theta[k]) for i, k in pairs)
    return sum(abs(theta[i] - theta[k]) / total
               * abs((theta_hat[i] - theta_hat[k]) / (theta[i] - theta[k]) - 1.0) for i, k in pairs)


def _loop_atte_error(cond_hat, cond):
    n = len(cond)
    triples = [(i, k, j) for i, k, j in itertools.product(range(n), repeat=3) if len({i, k, j}) == 3]
    true = {t: cond[t[0]][t[2]] - cond[t[1]][t[2]] for t in triples}
    total = sum(abs(v) for v in true.values())
    return sum(abs(true[t]) / total * abs((cond_hat[t[0]][t[2]] - cond_hat[t[1]][t[2]]) / true[t] - 1.0)
               for t in triples)


def test_exact_estimates_have_zero_error():
    theta = [1.0, 2.0, 4.0]
    series = ExperimentSeries.from_reports([_report(theta, _diag(theta), theta, _diag(theta))])
    assert weighted_rel_err_ate(series, "IwC") == 0.0


def test_doubled_effects_have_unit_error():
    theta = [1.0, 2.0, 4.0, 8.0, 16.0]
    doubled = [2.0 * t for t in theta]
    series = ExperimentSeries.from_reports([_report(doubled, _diag(doubled), theta, _diag(theta))])
    assert weighted_rel_err_ate(series, "IwC") == pytest.approx(1.0, rel=1e-12)


def test_five_level_errors_match_loops(rng):
    theta = rng.normal(size=5)
    theta_hat = theta + 0.1 * rng.normal(size=5)
    cond = rng.normal(size=(5, 5))
    cond_hat = cond + 0.1 * rng.normal(size=(5, 5))
    series = ExperimentSeries.from_reports([
        _report(theta_hat.tolist(), cond_hat.tolist(), theta.tolist(), cond.tolist())
    ])
    assert weighted_rel_err_ate(series, "IwC") == pytest.approx(_loop_ate_error(theta_hat, theta), rel=1e-12)
    assert weighted_rel_err_atte(series, "IwC") == pytest.approx(_loop_atte_error(cond_hat, cond), rel=1e-12)


def test_error_is_averaged_over_repetitions():
    theta = [1.0, 3.0]
    exact = _report(theta, _diag(theta), theta, _diag(theta))
    doubled = _report([2.0, 6.0], _diag([2.0, 6.0]), theta, _diag(theta))
    series = ExperimentSeries.from_reports([exact, doubled])
    assert weighted_rel_err_ate(series, "IwC") == pytest.approx(0.5)


def test_zero_true_effects_are_dropped_with_warning():
    theta = [1.0, 1.0, 2.0]
    series = ExperimentSeries.from_reports([_report([1.0, 1.1, 2.0], _diag(theta), theta, _diag(theta))])
    with pytest.warns(UserWarning, match="dropped"):
        result = weighted_ate_error(series, "IwC")
    assert result.dropped == 2
    assert result.repetitions == 1


def test_all_zero_true_effects():
    flat = [2.0, 2.0, 2.0]
    series = ExperimentSeries.from_reports([_report([1.0, 2.0, 3.0], _diag(flat), flat, _diag(flat))])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(AllTrueEffectsZero):
            weighted_rel_err_ate(series, "IwC")


@pytest.mark.parametrize("ioc, iwc, expected", [
    (0.161, 0.0235, 0.854),
    (0.8812, 0.1205, 0.8633),
])
def test_error_reduction(ioc, iwc, expected):
    assert error_reduction(ioc, iwc) == pytest.approx(expected, abs=1e-3)


def test_error_reduction_needs_positive_baseline():
    with pytest.raises(DivisionByZeroErr):
        error_reduction(0.0, 0.1)


# --- series ------------------------------------------------------------------

def test_series_validation():
    theta = [1.0, 2.0]
    with pytest.raises(ConfigError):
        ExperimentSeries.from_reports([])
    bare = _report(theta, _diag(theta), theta, _diag(theta)).model_copy(update={'truth': None})
    with pytest.raises(ConfigError):
        ExperimentSeries.from_reports([bare])
    three = [1.0, 2.0, 3.0]
    with pytest.raises(ConfigError):
        ExperimentSeries.from_reports([_report(theta, _diag(theta), theta, _diag(theta)),
                                       _report(three, _diag(three), three, _diag(three))])


def test_stacked_rejects_unknown_estimand():
    theta = [1.0, 2.0]
    series = ExperimentSeries.from_reports([_report(theta, _diag(theta), theta, _diag(theta))])
    with pytest.raises(ConfigError):
        series.stacked("IwC", "marginal")


# --- consistency -------------------------------------------------------------

@pytest.fixture
def two_reps():
    truth_cond = [[1.0, 1.0], [2.0, 2.0]]
    return ExperimentSeries.from_reports([
        _report([1.0, 2.0], [[1.0, 0.8], [2.1, 2.0]], [1.0, 2.5], truth_cond),
        _report([1.2, 2.4], [[1.0, 1.1], [1.9, 2.0]], [1.0, 2.5], truth_cond),
    ])


def test_consistency_mean_hand_values(two_reps):
    # |2.2/2.0 - 1| and |4.4/5.0 - 1|
    assert consistency_mean(two_reps, "IwC") == pytest.approx(0.11, rel=1e-12)
    # off-diagonal (0|1): |1.9/2.0 - 1|, (1|0): |4.0/4.0 - 1|
    assert consistency_mean(two_reps, "IwC", "conditional") == pytest.approx(0.025, rel=1e-12)


def test_consistency_std_hand_values(two_reps):
    expected = (np.std([0.0, 0.2], ddof=1) + np.std([-0.5, -0.1], ddof=1)) / 2
    assert consistency_std(two_reps, "IwC") == pytest.approx(expected, rel=1e-12)
    expected = (np.std([-0.2, 0.1], ddof=1) + np.std([0.1, -0.1], ddof=1)) / 2
    assert consistency_std(two_reps, "IwC", "conditional") == pytest.approx(expected, rel=1e-12)


def test_consistency_std_needs_two_repetitions():
    theta = [1.0, 2.0]
    series = ExperimentSeries.from_reports([_report(theta, _diag(theta), theta, _diag(theta))])
    with pytest.raises(InsufficientRepetitions):
        consistency_std(series, "IwC")


def test_consistency_mean_zero_denominator():
    series = ExperimentSeries.from_reports([
        _report([1.0, 2.0], _diag([1.0, 2.0]), [1.0, 2.0], _diag([1.0, 2.0])),
        _report([1.0, 2.0], _diag([1.0, 2.0]), [-1.0, 2.0], _diag([-1.0, 2.0])),
    ])
    with pytest.raises(ZeroDenominator):
        consistency_mean(series, "IwC")


def test_consistency_curve_is_ordered(two_reps):
    theta = [1.0, 2.5]
    single = ExperimentSeries.from_reports([_report(theta, _diag(theta), theta, _diag(theta))])
    curve = consistency_curve({800: single, 400: two_reps}, "IwC")
    assert [point['n_rows'] for point in curve] == [400, 800]
    assert curve[0]['mean'] == pytest.approx(0.11)
    assert curve[1]['mean'] == 0.0
    assert np.isnan(curve[1]['std'])


# --- decomposition -----------------------------------------------------------

def _truth_columns(table):
    g = np.column_stack([1.0 + 0.5 * k + table.u.sum(axis=1) - table.z.sum(axis=1) for k in range(3)])
    score = table.x[:, 0] + table.z[:, 0]
    logits = np.column_stack([k * score for k in range(3)])
    p = np.exp(logits - logits.max(axis=1, keepdims=True))
    return g, p / p.sum(axis=1, keepdims=True)


def test_decomposition_terms_sum_to_error(make_table):
    table = make_table(n_rows=50)
    g_true, p_true = _truth_columns(table)
    sample = SimpleNamespace(g=g_true, propensity=p_true)
    g_hat = CallableOutcomeModel(lambda k, u, z: 0.8 * (1.0 + 0.5 * k + u.sum(axis=1)), 3, 2, 2)
    p_hat = CallablePropensityModel(lambda x, z: np.full((len(x), 3), 1.0 / 3.0), 3, 2, 2)
    bundle = NuisanceBundle(g_hat, p_hat, eval_rows=np.arange(50))
    for i in range(3):
        terms = decompose_iwc_error(table, bundle, sample, i)
        assert terms.sampling == 0.0
        assert terms.term_sum() == pytest.approx(terms.total, abs=1e-10)
        shifted = decompose_iwc_error(table, bundle, sample, i, theta_true=terms.theta_true + 0.25)
        assert shifted.sampling == pytest.approx(0.25)
    terms = decompose_iwc_error_conditional(table, bundle, sample, 0, 2)
    assert terms.given == 2
    assert terms.term_sum() == pytest.approx(terms.total, abs=1e-10)


def test_conditional_decomposition_uses_true_marginal(make_table):
    table = make_table(n_rows=80)
    g_true, p_true = _truth_columns(table)
    sample = SimpleNamespace(g=g_true, propensity=p_true)
    g_hat = CallableOutcomeModel(lambda k, u, z: 0.8 * (1.0 + 0.5 * k + u.sum(axis=1)), 3, 2, 2)
    p_hat = CallablePropensityModel(lambda x, z: np.full((len(x), 3), 1.0 / 3.0), 3, 2, 2)
    bundle = NuisanceBundle(g_hat, p_hat, eval_rows=np.arange(80))
    m_hat = np.count_nonzero(table.d == 2) / 80
    m_true = float(np.mean(p_true[:, 2]))

    terms = decompose_iwc_error_conditional(table, bundle, sample, 0, 2)
    assert terms.vanishing == pytest.approx(terms.theta_hat * (m_hat / m_true - 1.0), rel=1e-12)
    assert terms.sampling == pytest.approx(terms.theta_true * (1.0 - m_hat / m_true), abs=1e-12)
    assert terms.term_sum() == pytest.approx(terms.total, abs=1e-10)

    plug_in = decompose_iwc_error_conditional(table, bundle, sample, 0, 2, m_true=m_hat)
    assert plug_in.vanishing == 0.0
    assert plug_in.sampling == pytest.approx(0.0, abs=1e-12)
    assert plug_in.outcome_bias == pytest.approx(terms.outcome_bias * m_true / m_hat, rel=1e-12)
    with pytest.raises(DomainError):
        decompose_iwc_error_conditional(table, bundle, sample, 0, 2, m_true=0.0)


def test_decomposition_with_true_nuisances(make_table):
    table = make_table(n_rows=50)
    g_true, p_true = _truth_columns(table)
    sample = SimpleNamespace(g=g_true, propensity=p_true)
    g_model = CallableOutcomeModel(lambda k, u, z: 1.0 + 0.5 * k + u.sum(axis=1) - z.sum(axis=1), 3, 2, 2)

    def p_fn(x, z):
        logits = np.column_stack([k * (x[:, 0] + z[:, 0]) for k in range(3)])
        p = np.exp(logits - logits.max(axis=1, keepdims=True))
        return p / p.sum(axis=1, keepdims=True)

    bundle = NuisanceBundle(g_model, CallablePropensityModel(p_fn, 3, 2, 2, clip=1e-12), eval_rows=np.arange(50))
    terms = decompose_iwc_error(table, bundle, sample, 1)
    assert terms.outcome_bias == 0.0
    assert terms.mixed_nuisance == pytest.approx(0.0, abs=1e-9)
    assert terms.total == pytest.approx(terms.residual_sampling, abs=1e-9)


def test_decomposition_conditional_needs_treated_rows(make_table):
    table = make_table(n_rows=50)
    g_true, p_true = _truth_columns(table)
    rows = np.flatnonzero(table.d != 2)
    g_hat = CallableOutcomeModel(lambda k, u, z: np.zeros(len(u)), 3, 2, 2)
    p_hat = CallablePropensityModel(lambda x, z: np.full((len(x), 3), 1.0 / 3.0), 3, 2, 2)
    bundle = NuisanceBundle(g_hat, p_hat, eval_rows=rows)
    sample = SimpleNamespace(g=g_true, propensity=p_true)
    with pytest.raises(EmptyTreatedGroup):
        decompose_iwc_error_conditional(table, bundle, sample, 0, 2)


def test_decomposition_on_generated_sample():
    config = DgpConfig.semi_synthetic(propensity_truth="analytic")
    sample = gen_dataset(config, 400, seed=12)
    split = split_train_test(sample.table, 0.5, seed=12, n_levels=5)
    g_hat = fit_outcome_model(OutcomeModelSpec(family="OLS"), sample.table, split.train_rows, seed=0, n_levels=5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p_hat = fit_propensity(sample.table, split.train_rows, n_levels=5)
    bundle = NuisanceBundle(g_hat, p_hat, eval_rows=split.test_rows)
    for i in range(5):
        terms = decompose_iwc_error(sample.table, bundle, sample, i)
        assert terms.term_sum() == pytest.approx(terms.total, abs=1e-8 * max(1.0, abs(terms.theta_true)))
