#!/usr/bin/env python3
"""
IoC / IwC / DRE estimators and report composition on synthetic tables
"""

from dataclasses import replace

import numpy as np
import pytest

from data import ObservationTable
from errors import ConfigError, DomainError, EmptyTreatedGroup
from estimators import (
    EstimateReport,
    FamilyEstimates,
    NuisanceBundle,
    full_report,
    nuisance_values,
    theta_dre_conditional,
    theta_ioc,
    theta_ioc_conditional,
    theta_iwc,
    theta_iwc_conditional,
)
from estimators.theta import dre_conditional, iwc, iwc_conditional
from learners import CallableOutcomeModel, CallablePropensityModel


def _true_g(shift=0.0):
    def g(level, u, z):
        return 1.0 + 0.5 * level + u.sum(axis=1) - z.sum(axis=1) + shift

    return CallableOutcomeModel(g, n_levels=3, p_u=2, p_z=2)


def _true_p(clip=1e-6):
    def p(x, z):
        score = x[:, 0] + z[:, 0]
        logits = np.column_stack([k * score for k in range(3)])
        probs = np.exp(logits - logits.max(axis=1, keepdims=True))
        return probs / probs.sum(axis=1, keepdims=True)

    return CallablePropensityModel(p, n_levels=3, p_x=2, p_z=2, clip=clip)


def _uniform_p():
    return CallablePropensityModel(lambda x, z: np.full((len(x), 3), 1.0 / 3.0), n_levels=3,
                                   p_x=2, p_z=2, clip=1e-4)


def _zero_g():
    return CallableOutcomeModel(lambda level, u, z: np.zeros(len(u)), n_levels=3, p_u=2, p_z=2)


@pytest.fixture
def exact_table(make_table):
    return make_table(n_rows=300, noise=0.0)


def test_exact_outcome_model_makes_corrections_vanish(exact_table):
    bundle = NuisanceBundle(_true_g(), _true_p(), eval_rows=np.arange(300))
    for i in range(3):
        assert theta_iwc(exact_table, bundle, i) == pytest.approx(theta_ioc(exact_table, bundle, i), abs=1e-9)
        for j in range(3):
            if i == j:
                continue
            expected = theta_ioc_conditional(exact_table, bundle, i, j)
            assert theta_iwc_conditional(exact_table, bundle, i, j) == pytest.approx(expected, abs=1e-9)
            assert theta_dre_conditional(exact_table, bundle, i, j) == pytest.approx(expected, abs=1e-9)


def test_iwc_with_zero_outcome_model_is_inverse_weighting(small_table):
    bundle = NuisanceBundle(_zero_g(), _uniform_p(), eval_rows=np.arange(200))
    for i in range(3):
        on_i = small_table.d == i
        expected = 3.0 * small_table.y[on_i].sum() / 200
        assert theta_iwc(small_table, bundle, i) == pytest.approx(expected, rel=1e-12)


def test_iwc_repairs_a_biased_outcome_model(make_table):
    table = make_table(n_rows=5000)
    bundle = NuisanceBundle(_true_g(shift=0.3), _true_p(), eval_rows=np.arange(5000))
    sample_truth = float(np.mean(_true_g().predict(1, table.u, table.z)))
    assert theta_ioc(table, bundle, 1) - sample_truth == pytest.approx(0.3, abs=1e-10)
    assert abs(theta_iwc(table, bundle, 1) - sample_truth) < 0.05


def test_dre_scales_with_supplied_marginal(small_table):
    rows = np.arange(200)
    base = NuisanceBundle(_zero_g(), _uniform_p(), eval_rows=rows)
    share = np.array([np.mean(small_table.d == j) for j in range(3)])
    halved = NuisanceBundle(_zero_g(), _uniform_p(), eval_rows=rows, m_vals=2.0 * share)
    same = NuisanceBundle(_zero_g(), _uniform_p(), eval_rows=rows, m_vals=share)
    reference = theta_iwc_conditional(small_table, base, 0, 2)
    assert theta_dre_conditional(small_table, same, 0, 2) == pytest.approx(reference, rel=1e-12)
    assert theta_dre_conditional(small_table, halved, 0, 2) == pytest.approx(0.5 * reference, rel=1e-12)


def test_empty_treated_group(small_table):
    rows = np.flatnonzero(small_table.d != 1)
    bundle = NuisanceBundle(_true_g(), _true_p(), eval_rows=rows)
    with pytest.raises(EmptyTreatedGroup):
        theta_ioc_conditional(small_table, bundle, 0, 1)
    with pytest.raises(EmptyTreatedGroup):
        theta_iwc_conditional(small_table, bundle, 2, 1)


def test_report_marks_missing_level(small_table):
    rows = np.flatnonzero(small_table.d != 1)
    bundle = NuisanceBundle(_true_g(), _true_p(), eval_rows=rows)
    report = full_report(small_table, bundle, levels=[10.0, 20.0, 30.0])
    assert report.diagnostics['missing_levels'] == [1]
    assert report.level_counts[1] == 0
    for name in ("IoC", "IwC", "DRE"):
        family = report.family(name)
        assert all(row[1] is None for row in family.theta_i_given_j)
        assert family.atte[0][2][1] is None
        assert family.atte[0][2][0] is not None
        # unconditional effects do not need level-1 rows
        assert np.all(np.isfinite(family.ate_array()))


def test_report_diagonal_is_factual_mean(small_table):
    bundle = NuisanceBundle(_zero_g(), _uniform_p(), eval_rows=np.arange(200))
    report = full_report(small_table, bundle)
    for j in range(3):
        expected = small_table.y[small_table.d == j].mean()
        for family in report.families.values():
            assert family.theta_i_given_j[j][j] == pytest.approx(expected, rel=1e-12)


def test_report_subset_of_families(small_table):
    bundle = NuisanceBundle(_true_g(), _true_p(), eval_rows=np.arange(200))
    report = full_report(small_table, bundle, families=("IwC",))
    assert list(report.families) == ["IwC"]
    with pytest.raises(KeyError):
        report.family("IoC")


def test_report_round_trip(tmp_path, small_table):
    bundle = NuisanceBundle(_true_g(), _true_p(), eval_rows=np.arange(200))
    report = full_report(small_table, bundle, levels=[1.0, 2.0, 3.0])
    restored = EstimateReport.load(report.save(tmp_path / "report.json"))
    assert restored == report


def test_compose_builds_differences():
    estimates = FamilyEstimates.compose([1.0, 3.0], [[1.5, 2.0], [2.5, None]])
    assert estimates.ate == [[0.0, -2.0], [2.0, 0.0]]
    assert estimates.atte[1][0][0] == pytest.approx(1.0)
    assert estimates.atte[0][1][1] is None
    assert np.isnan(estimates.conditional_array()[1][1])


def test_bundle_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        NuisanceBundle(_true_g(), _true_p(), eval_rows=np.array([], dtype=int))
    with pytest.raises(DomainError):
        NuisanceBundle(_true_g(), _true_p(), eval_rows=np.arange(3), m_vals=[0.5, 0.5, 0.0])
    two_levels = CallablePropensityModel(lambda x, z: np.full((len(x), 2), 0.5), n_levels=2, p_x=2, p_z=2)
    with pytest.raises(ConfigError):
        NuisanceBundle(_true_g(), two_levels, eval_rows=np.arange(3))


def _loop_thetas(table, g_model, p_model, i, j):
    """Row-by-row IoC / IwC / DRE sums for one (i, j) pair"""
    n = table.n_rows
    g_sum = g_sum_j = iwc_sum = iwc_sum_j = 0.0
    n_j = 0
    for row in range(n):
        g = g_model.predict_matrix(table.u[row:row + 1], table.z[row:row + 1])[0]
        p = p_model.predict_proba(table.x[row:row + 1], table.z[row:row + 1])[0]
        g_sum += g[i]
        if table.d[row] == j:
            n_j += 1
            g_sum_j += g[i]
        if table.d[row] == i:
            residual = table.y[row] - g[i]
            iwc_sum += residual / p[i]
            iwc_sum_j += p[j] / p[i] * residual
    ioc = g_sum / n
    iwc = (g_sum + iwc_sum) / n
    if n_j == 0:
        return ioc, iwc, None
    conditional = (g_sum_j + iwc_sum_j) / n_j
    return ioc, iwc, (g_sum_j / n_j, conditional, (g_sum_j + iwc_sum_j) / n / (n_j / n))


def test_estimators_match_row_loop(rng, make_table):
    for _ in range(200):
        table = make_table(n_rows=int(rng.integers(10, 51)))
        g_model, p_model = _true_g(shift=float(rng.normal())), _true_p(clip=1e-4)
        bundle = NuisanceBundle(g_model, p_model, eval_rows=np.arange(table.n_rows))
        i, j = (int(level) for level in rng.choice(3, size=2, replace=False))
        ioc, iwc, conditional = _loop_thetas(table, g_model, p_model, i, j)
        assert theta_ioc(table, bundle, i) == pytest.approx(ioc, rel=1e-12, abs=1e-12)
        assert theta_iwc(table, bundle, i) == pytest.approx(iwc, rel=1e-12, abs=1e-10)
        if conditional is None:
            with pytest.raises(EmptyTreatedGroup):
                theta_iwc_conditional(table, bundle, i, j)
            continue
        ioc_j, iwc_j, dre_j = conditional
        assert theta_ioc_conditional(table, bundle, i, j) == pytest.approx(ioc_j, rel=1e-12, abs=1e-12)
        assert theta_iwc_conditional(table, bundle, i, j) == pytest.approx(iwc_j, rel=1e-12, abs=1e-10)
        assert theta_dre_conditional(table, bundle, i, j) == pytest.approx(dre_j, rel=1e-12, abs=1e-10)


def _shifted(table, c):
    return ObservationTable(y=table.y + c, d=table.d, u=table.u, x=table.x, z=table.z)


def test_translation_shifts_thetas_and_keeps_effects(rng, make_table):
    for _ in range(50):
        table = make_table(n_rows=int(rng.integers(20, 81)))
        c = float(rng.normal(scale=3.0))
        rows = np.arange(table.n_rows)
        base = full_report(table, NuisanceBundle(_true_g(), _true_p(clip=1e-4), eval_rows=rows))
        moved = full_report(_shifted(table, c), NuisanceBundle(_true_g(shift=c), _true_p(clip=1e-4), eval_rows=rows))
        for family in ('IoC', 'IwC', 'DRE'):
            before, after = base.families[family], moved.families[family]
            np.testing.assert_allclose(after.theta_i, np.asarray(before.theta_i) + c, atol=1e-9)
            for row_before, row_after in zip(before.theta_i_given_j, after.theta_i_given_j):
                for a, b in zip(row_before, row_after):
                    assert (a is None) == (b is None)
                    if a is not None:
                        assert b == pytest.approx(a + c, abs=1e-9)
            np.testing.assert_allclose(after.ate_array(), before.ate_array(), atol=1e-9)
            np.testing.assert_allclose(after.atte_array(), before.atte_array(), atol=1e-9, equal_nan=True)


def test_common_propensity_factor(rng, make_table):
    table = make_table(n_rows=120)
    bundle = NuisanceBundle(_zero_g(), _true_p(clip=1e-4), eval_rows=np.arange(120))
    values = nuisance_values(table, bundle)
    scaled = replace(values, p=0.5 * values.p)
    for i in range(3):
        # the unconditional correction divides by P̂ᵢ alone
        assert iwc(scaled, i) != pytest.approx(iwc(values, i))
        for j in range(3):
            if i != j and values.count(j):
                assert iwc_conditional(scaled, i, j) == pytest.approx(iwc_conditional(values, i, j), rel=1e-12)
                assert dre_conditional(scaled, i, j) == pytest.approx(dre_conditional(values, i, j), rel=1e-12)

    # raw probabilities are renormalised before clipping, so a common factor on the model is a no-op
    halved = _true_p(clip=1e-4)
    halved_fn = halved.fn
    halved.fn = lambda x, z: 0.5 * halved_fn(x, z)
    rescaled = NuisanceBundle(_zero_g(), halved, eval_rows=np.arange(120))
    for i in range(3):
        assert theta_iwc(table, rescaled, i) == pytest.approx(theta_iwc(table, bundle, i), rel=1e-12)
