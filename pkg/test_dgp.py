#!/usr/bin/env python3
"""
Data-generating process: interaction terms, the f(D) q(U, Z) law, quintile
treatment assignment, propensities, reproducibility and ground truth
"""

import math

import numpy as np
import pandas as pd
import pytest

from data import read_table_csv
from dgp import (
    DgpConfig,
    DgpSampler,
    assign_treatment,
    correlation_matrix,
    export_sample,
    f_of_d,
    factor,
    gen_dataset,
    gen_semi_synthetic,
    ground_truth,
    interaction_vector,
    k_of,
    k_values,
    labels_from_scores,
    q_of,
    quintile_assignment,
    resampled_propensities,
    sample_features,
    truth_from_counterfactuals,
)
from dgp.treatment import draw_nu
from errors import ConfigError, DegenerateScores, DimensionMismatch, EmptyTreatedGroup
from scores import ScoreKind


@pytest.fixture(scope="module")
def config():
    return DgpConfig.semi_synthetic(propensity_truth="analytic")


@pytest.fixture(scope="module")
def sample(config):
    return gen_dataset(config, 1000, seed=5)


# --- interactions and k ------------------------------------------------------

def test_interaction_lengths():
    assert interaction_vector(np.ones(20), 2).shape == (190,)
    assert interaction_vector(np.ones(10), 4).shape == (210,)
    np.testing.assert_array_equal(interaction_vector(np.ones(6), 3), np.ones(20))


def test_interaction_order_is_lexicographic():
    np.testing.assert_array_equal(interaction_vector([1.0, 2.0, 3.0], 2), [2.0, 3.0, 6.0])
    np.testing.assert_array_equal(interaction_vector([1.0, 2.0, 3.0, 5.0], 3), [6.0, 10.0, 15.0, 30.0])


@pytest.mark.parametrize("order", [1, 5])
def test_interaction_order_bounds(order):
    with pytest.raises(ConfigError):
        interaction_vector(np.ones(6), order)


def test_k_linear_mode(rng):
    V = rng.standard_normal((4, 3))
    c = [0.5, -1.0, 2.0]
    np.testing.assert_allclose(k_values(V, [c], "linear"), V @ np.array(c))


def test_k_simulated_mode_matches_explicit_sum(rng):
    p = 5
    v = rng.uniform(0.5, 2.0, size=p) * rng.choice([-1.0, 1.0], size=p)
    c_vectors = [rng.standard_normal(math.comb(p, r)).tolist() for r in range(1, 5)]
    terms = [v] + [interaction_vector(v, r) for r in range(2, 5)]
    inner = sum(np.dot(c, t) for c, t in zip(c_vectors, terms))
    logs = sum(np.dot(c, np.log(np.abs(t))) for c, t in zip(c_vectors, terms))
    assert k_of(v, c_vectors, "simulated") == pytest.approx(math.log(abs(inner)) + logs, abs=1e-9)


# --- q and f -----------------------------------------------------------------

def test_q_without_log_term_is_exponential(config):
    plain = config.model_copy(update={'e1': 0.0})
    z = np.linspace(-1.0, 1.0, config.p_z)
    expected = math.exp(abs(float(np.dot(config.a0, z)))) ** config.r_exp
    assert q_of(np.zeros(config.p_u), z, plain) == pytest.approx(expected, rel=1e-12)
    assert q_of(np.zeros(config.p_u), np.zeros(config.p_z), plain) == pytest.approx(1.0)


def test_q_floors_log_argument(config):
    # e2 = 0 with k = 0 would take log(0)
    zero_log = config.model_copy(update={'e2': 0.0})
    value = q_of(np.zeros(config.p_u), np.zeros(config.p_z), zero_log)
    assert np.isfinite(value)


def test_f_formula(config):
    expected = 0.05 + 0.95 * (0.05 * 1.0 + 0.95 * math.e)
    assert f_of_d(1.0, config) == pytest.approx(expected, rel=1e-12)
    assert f_of_d(1.0, config) == pytest.approx(2.550749, abs=1e-6)
    np.testing.assert_allclose(f_of_d([0.0, 1.0], config), [0.05 + 0.95 * 0.95, expected])


def test_f_is_flat_without_causality(config):
    flat = config.with_knobs(alpha=1.0)
    np.testing.assert_array_equal(f_of_d(np.linspace(-2, 2, 9), flat), np.ones(9))


def test_f_rejects_overflowing_level(config):
    with pytest.raises(ConfigError):
        f_of_d(30.0, config)


# --- features ----------------------------------------------------------------

def test_correlation_matrix_structure():
    C = correlation_matrix(5, 0.3, 1.0)
    np.testing.assert_allclose(np.diag(C), 1.0)
    assert C[0, 1] == pytest.approx(0.3 + 0.7 * math.exp(-1.0))
    np.testing.assert_allclose(C, C.T)


def test_factor_of_rank_one_correlation():
    C = correlation_matrix(4, 1.0, 0.5)
    np.testing.assert_allclose(C, np.ones((4, 4)))
    L = factor(C)
    np.testing.assert_allclose(L @ L.T, C, atol=1e-10)


def test_light_tail_feature_covariance(config):
    U, X, Z = sample_features(config, 20_000, seed=2)
    assert (U.shape, X.shape, Z.shape) == ((20_000, 10), (20_000, 10), (20_000, 20))
    expected = correlation_matrix(10, 0.8, 0.2)
    np.testing.assert_allclose(np.cov(U.T), expected, atol=0.05)


def test_heavy_tail_keeps_covariance(config):
    heavy = config.with_knobs(tail="heavy")
    U, _, Z = sample_features(heavy, 40_000, seed=2)
    np.testing.assert_allclose(np.diag(np.cov(Z.T)), 1.0, atol=0.15)
    # student-t draws put more mass in the tails than the normal block
    light_Z = sample_features(config, 40_000, seed=2)[2]
    assert np.mean(np.abs(Z) > 4.0) > np.mean(np.abs(light_Z) > 4.0)


def _second_moments(block):
    """E[v vᵀ] for mean-zero features, with the standard error of each entry"""
    n = len(block)
    moments = block.T @ block / n
    stderr = np.stack([(block * block[:, [i]]).std(axis=0) for i in range(block.shape[1])]) / math.sqrt(n)
    return moments, stderr


@pytest.mark.slow
@pytest.mark.parametrize("tail", ["light", "heavy"])
def test_feature_covariance_at_scale(tail):
    config = DgpConfig.simulated(tail=tail)
    blocks = dict(zip("uxz", sample_features(config, 1_000_000, seed=4, n_jobs=-1)))
    for name, block in blocks.items():
        params = config.correlation[name]
        expected = correlation_matrix(block.shape[1], params.a, params.b)
        moments, stderr = _second_moments(block)
        if tail == "light":
            np.testing.assert_allclose(moments, expected, atol=0.01, err_msg=name)
        else:
            # a dof-5 student-t has three times the normal fourth moment
            assert np.all(np.abs(moments - expected) <= 5.0 * stderr), name


def test_student_t_noise_has_configured_scale():
    t_law = DgpConfig.semi_synthetic(nu_law="student_t", nu_scale=2.0)
    nu = draw_nu(t_law, 200_000, seed=9)
    assert np.std(nu) == pytest.approx(2.0, rel=0.03)


# --- treatment assignment ----------------------------------------------------

def test_quintiles_of_one_to_hundred():
    assignment = quintile_assignment(np.arange(1, 101, dtype=float))
    np.testing.assert_array_equal(np.bincount(assignment.labels), [20] * 5)
    scale = math.sqrt(100 * 101 / 12)
    assert assignment.scale == pytest.approx(scale)
    np.testing.assert_allclose(assignment.levels, np.array([10.5, 30.5, 50.5, 70.5, 90.5]) / scale)
    np.testing.assert_array_equal(assignment.labels[[0, 19, 20, 99]], [0, 0, 1, 4])


def test_threshold_ties_fall_in_lower_category():
    labels = labels_from_scores(np.array([0.0, 0.5, 1.0, 1.5]), np.array([0.0, 1.0]), 1.0)
    np.testing.assert_array_equal(labels, [0, 1, 1, 2])


@pytest.mark.parametrize("scores", [
    np.zeros(10),
    np.r_[np.zeros(30), np.arange(70.0)],
    np.arange(3.0),
])
def test_degenerate_scores(scores):
    with pytest.raises(DegenerateScores):
        quintile_assignment(scores)


def test_generated_levels_are_balanced(sample):
    np.testing.assert_array_equal(np.bincount(sample.table.d, minlength=5), [200] * 5)
    assert np.all(np.diff(sample.coding.levels) > 0)


def test_propensities_are_distributions(sample):
    np.testing.assert_allclose(sample.propensity.sum(axis=1), 1.0)
    assert np.all(sample.propensity > 0)
    np.testing.assert_allclose(sample.propensity.mean(axis=0), 0.2, atol=0.04)


def test_resampled_propensities_track_analytic(config, sample):
    rows = slice(0, 200)
    resampled = resampled_propensities(sample.signal[rows], sample.thresholds, sample.scale, config,
                                       seed=1, n_nu=4000)
    np.testing.assert_allclose(resampled.sum(axis=1), 1.0)
    np.testing.assert_allclose(resampled, sample.propensity[rows], atol=0.05)


# --- samples -----------------------------------------------------------------

def test_generation_is_reproducible(config, sample):
    again = gen_dataset(config, 1000, seed=5)
    np.testing.assert_array_equal(again.table.y, sample.table.y)
    np.testing.assert_array_equal(again.table.d, sample.table.d)
    different = gen_dataset(config, 1000, seed=6)
    assert not np.array_equal(different.table.y, sample.table.y)


def test_outcome_is_counterfactual_plus_noise(sample):
    np.testing.assert_array_equal(sample.table.y, sample.observed_g() + sample.xi)
    np.testing.assert_allclose(sample.g, sample.q[:, None] * sample.f_levels[None, :])


def test_noise_free_generation(config):
    clean = gen_dataset(config.model_copy(update={'xi_ratio': 0.0}), 300, seed=1)
    np.testing.assert_array_equal(clean.table.y, clean.observed_g())


def test_semi_synthetic_matches_generated_features(config):
    features = sample_features(config, 500, seed=4)
    direct = gen_dataset(config, 500, seed=4)
    regenerated = gen_semi_synthetic(features, config, seed=4)
    np.testing.assert_array_equal(direct.table.y, regenerated.table.y)
    np.testing.assert_array_equal(direct.table.d, regenerated.table.d)


def test_semi_synthetic_checks_dimensions(config):
    U, X, Z = sample_features(config, 50, seed=0)
    with pytest.raises(DimensionMismatch):
        gen_semi_synthetic((U[:, :5], X, Z), config, seed=0)
    with pytest.raises(DimensionMismatch):
        gen_semi_synthetic((U, X[:40], Z), config, seed=0)


@pytest.mark.slow
def test_parallel_blocks_match_serial(config):
    serial = sample_features(config, 10_000, seed=8)
    parallel = sample_features(config, 10_000, seed=8, n_jobs=2)
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a, b)


# --- ground truth ------------------------------------------------------------

def test_ground_truth_of_credit_example(credit_true_g):
    truth = truth_from_counterfactuals(credit_true_g, np.array([0, 0, 1, 1]))
    assert truth.ate[0][1] == pytest.approx(-0.49925)
    assert truth.atte[0][1][1] == pytest.approx(-0.4985)
    assert truth.theta_i_given_j[0][0] == pytest.approx(0.073)


def test_ground_truth_needs_every_level(credit_true_g):
    with pytest.raises(EmptyTreatedGroup):
        truth_from_counterfactuals(credit_true_g, np.array([0, 0, 0, 0]))
    partial = truth_from_counterfactuals(credit_true_g, np.array([0, 0, 0, 0]), allow_missing=True)
    assert partial.theta_i_given_j[0][1] is None


def test_no_effects_without_causality(config):
    flat = gen_dataset(config.with_knobs(alpha=1.0), 500, seed=3)
    truth = ground_truth(flat)
    np.testing.assert_allclose(truth.ate_array(), 0.0, atol=1e-12)
    np.testing.assert_allclose(np.nan_to_num(truth.atte_array()), 0.0, atol=1e-12)


def test_effects_shrink_as_causality_rises(config):
    sizes = []
    for alpha in (0.05, 0.5, 0.95):
        truth = ground_truth(gen_dataset(config.with_knobs(alpha=alpha), 500, seed=3))
        sizes.append(float(np.mean(np.abs(truth.ate_array()))))
    assert sizes[0] > sizes[1] > sizes[2] > 0.0
    # level values do not depend on alpha, so effects scale with 1 - alpha
    assert sizes[2] / sizes[0] == pytest.approx(0.05 / 0.95, rel=1e-9)


def test_export_writes_hidden_sidecar(tmp_path, sample):
    observed, sidecar = export_sample(sample, tmp_path / "sim.csv")
    assert sidecar.name == "sim.hidden.csv"
    table, coding = read_table_csv(observed)
    np.testing.assert_array_equal(table.d, sample.table.d)
    np.testing.assert_allclose(table.y, sample.table.y, rtol=1e-15)
    hidden = pd.read_csv(sidecar)
    assert {'q', 'xi', 'g_1', 'g_5', 'p_1', 'p_5', 'f_3'} <= set(hidden.columns)
    np.testing.assert_allclose(hidden['g_2'].to_numpy(), sample.g[:, 1], rtol=1e-15)


# --- population sampler ------------------------------------------------------

@pytest.fixture(scope="module")
def sampler(config):
    return DgpSampler(config, reference_rows=5000, n_truth=50_000)


def test_sampler_marginals(sampler):
    m = sampler.marginals()
    assert m.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(m, 0.2, atol=0.03)


def test_sampler_draws_share_the_population_law(sampler):
    first, second = sampler.sample(200, seed=1), sampler.sample(300, seed=2)
    np.testing.assert_array_equal(first.thresholds, second.thresholds)
    assert first.coding.levels == second.coding.levels


def test_sampler_truth_agrees_with_large_sample(sampler):
    draw = sampler.sample(50_000, seed=77)
    truth = ground_truth(draw)
    theta, stderr = sampler.theta_true(ScoreKind("IWC", 2))
    assert abs(theta - truth.theta_i[2]) < 6.0 * math.sqrt(2.0) * stderr
    conditional, cond_se = sampler.theta_true(ScoreKind("IWC", 1, 3))
    assert conditional == pytest.approx(truth.theta_i_given_j[1][3], abs=8.0 * cond_se + 0.02 * abs(conditional))


def test_sampler_truth_as_learners(sampler):
    draw = sampler.sample(300, seed=4)
    table = draw.table
    np.testing.assert_allclose(sampler.outcome_model().predict_matrix(table.u, table.z), draw.g, rtol=1e-15)
    probs = sampler.propensity_model(clip=1e-12).predict_proba(table.x, table.z)
    np.testing.assert_allclose(probs, draw.propensity, atol=1e-9)
    assert sampler.propensity_model().clip > 1e-12


def test_assignment_reproduces_generated_labels(config, sample):
    table = sample.table
    assignment = assign_treatment(table.x, table.z, sample.latent - sample.signal, config)
    np.testing.assert_array_equal(assignment.labels, table.d)
    np.testing.assert_array_equal(assignment.thresholds, sample.thresholds)
    np.testing.assert_allclose(assignment.levels, sample.coding.levels)
