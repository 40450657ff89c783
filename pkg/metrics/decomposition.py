"""
Error decomposition of the IwC estimate against known nuisances

θ_true - θ̂_w splits into a sampling term, an outcome-bias term, a residual
sampling term, a mixed nuisance term and a term that vanishes in
population. Diagnostic only.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel

from errors import DomainError, EmptyTreatedGroup, ImpactError
from estimators import NuisanceBundle, nuisance_values
from estimators.theta import iwc, iwc_conditional

SUM_TOLERANCE = 1e-10


class IwcErrorTerms(BaseModel):
    level: int
    given: Optional[int] = None
    theta_true: float
    theta_hat: float
    sampling: float
    outcome_bias: float
    residual_sampling: float
    mixed_nuisance: float
    vanishing: float = 0.0

    @property
    def total(self) -> float:
        return self.theta_true - self.theta_hat

    def term_sum(self) -> float:
        return math.fsum([self.sampling, self.outcome_bias, self.residual_sampling,
                          self.mixed_nuisance, self.vanishing])


def _mean(values) -> float:
    values = np.asarray(values, dtype=float)
    return math.fsum(values) / len(values)


def _checked(terms: IwcErrorTerms) -> IwcErrorTerms:
    scale = max(1.0, abs(terms.sampling), abs(terms.outcome_bias),
                abs(terms.residual_sampling), abs(terms.mixed_nuisance), abs(terms.vanishing))
    if abs(terms.term_sum() - terms.total) > SUM_TOLERANCE * scale:
        raise ImpactError(
            f"decomposition terms sum to {terms.term_sum():.12g}, expected {terms.total:.12g}"
        )
    return terms


def _truth_on_rows(sample, bundle: NuisanceBundle):
    rows = bundle.eval_rows
    return np.asarray(sample.g, dtype=float)[rows], np.asarray(sample.propensity, dtype=float)[rows]


def decompose_iwc_error(table, bundle: NuisanceBundle, sample, i: int,
                        theta_true: Optional[float] = None) -> IwcErrorTerms:
    """Terms of θ_true - θ̂_w^i; `sample` supplies the true g (N x n) and P (N x n) for the table rows.

    theta_true defaults to the evaluation-set mean of g(d^i, ·), which zeroes the sampling term.
    """
    values = nuisance_values(table, bundle)
    g_true, p_true = _truth_on_rows(sample, bundle)
    g, g_hat = g_true[:, i], values.g[:, i]
    e, e_hat = p_true[:, i], values.p[:, i]
    on_i = values.d == i
    y = values.y

    if theta_true is None:
        theta_true = _mean(g)
    residual = np.zeros(values.n_rows)
    residual[on_i] = (y[on_i] - g[on_i]) / e[on_i]
    mixed = np.zeros(values.n_rows)
    mixed[on_i] = (y[on_i] - g_hat[on_i]) / e_hat[on_i] - residual[on_i]

    return _checked(IwcErrorTerms(
        level=i,
        theta_true=float(theta_true),
        theta_hat=iwc(values, i),
        sampling=float(theta_true) - _mean(g),
        outcome_bias=_mean(g - g_hat),
        residual_sampling=-_mean(residual),
        mixed_nuisance=-_mean(mixed),
    ))


def decompose_iwc_error_conditional(table, bundle: NuisanceBundle, sample, i: int, j: int,
                                    theta_true: Optional[float] = None,
                                    m_true: Optional[float] = None) -> IwcErrorTerms:
    """Terms of θ_true - θ̂_w^{i|j} scaled by the true marginal m_j.

    m_true defaults to the evaluation-row mean of the true P_j. The estimator
    itself divides by m̂_j = N_j / N, so θ̂ (m̂_j / m_j - 1) lands in the
    vanishing term. theta_true defaults to the mean of g(d^i, ·) over the
    level-j rows.
    """
    values = nuisance_values(table, bundle)
    g_true, p_true = _truth_on_rows(sample, bundle)
    n = values.n_rows
    on_j = values.d == j
    m_hat = np.count_nonzero(on_j) / n
    if m_hat == 0:
        raise EmptyTreatedGroup(j)
    m = _mean(p_true[:, j]) if m_true is None else float(m_true)
    if not m > 0:
        raise DomainError(f"true marginal m_{j} must be positive, got {m}")
    on_i = values.d == i
    y = values.y
    g, g_hat = g_true[:, i], values.g[:, i]
    ratio = p_true[:, j] / p_true[:, i]
    ratio_hat = values.p[:, j] / values.p[:, i]

    observed_g = np.where(on_j, g, 0.0)
    if theta_true is None:
        theta_true = _mean(observed_g) / m_hat
    residual = np.zeros(n)
    residual[on_i] = ratio[on_i] * (y[on_i] - g[on_i])
    mixed = np.zeros(n)
    mixed[on_i] = ratio_hat[on_i] * (y[on_i] - g_hat[on_i]) - residual[on_i]
    theta_hat = iwc_conditional(values, i, j)

    return _checked(IwcErrorTerms(
        level=i,
        given=j,
        theta_true=float(theta_true),
        theta_hat=theta_hat,
        sampling=float(theta_true) - _mean(observed_g) / m,
        outcome_bias=_mean(np.where(on_j, g - g_hat, 0.0)) / m,
        residual_sampling=-_mean(residual) / m,
        mixed_nuisance=-_mean(mixed) / m,
        vanishing=theta_hat * (m_hat / m - 1.0),
    ))
