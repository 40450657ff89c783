"""
IoC, IwC and DRE estimates of θ^i and θ^{i|j}

Sums use math.fsum so fixture results are reproducible to 1e-12.
"""

import math
from typing import Dict, Optional

import numpy as np

from errors import DomainError, EmptyTreatedGroup

from .bundle import NuisanceBundle, NuisanceValues, nuisance_values


def _sum(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel())


# --- array-level forms (shared with full_report) ----------------------------

def ioc(values: NuisanceValues, i: int) -> float:
    return _sum(values.g[:, i]) / values.n_rows


def ioc_conditional(values: NuisanceValues, i: int, j: int) -> float:
    treated = values.d == j
    n_j = int(treated.sum())
    if n_j == 0:
        raise EmptyTreatedGroup(j)
    return _sum(values.g[treated, i]) / n_j


def iwc(values: NuisanceValues, i: int) -> float:
    on_i = values.d == i
    correction = (values.y[on_i] - values.g[on_i, i]) / values.p[on_i, i]
    return (_sum(values.g[:, i]) + _sum(correction)) / values.n_rows


def iwc_conditional(values: NuisanceValues, i: int, j: int) -> float:
    treated = values.d == j
    n_j = int(treated.sum())
    if n_j == 0:
        raise EmptyTreatedGroup(j)
    on_i = values.d == i
    weight = values.p[on_i, j] / values.p[on_i, i]
    correction = weight * (values.y[on_i] - values.g[on_i, i])
    return (_sum(values.g[treated, i]) + _sum(correction)) / n_j


def dre_conditional(values: NuisanceValues, i: int, j: int, m_j: Optional[float] = None) -> float:
    """Root of the empirical doubly-robust score; m_j defaults to N_j / N"""
    n = values.n_rows
    treated = values.d == j
    n_j = int(treated.sum())
    if n_j == 0:
        raise EmptyTreatedGroup(j)
    if m_j is None:
        m_j = n_j / n
    if m_j <= 0:
        raise DomainError(f"m_{j} must be positive, got {m_j}")
    on_i = values.d == i
    weight = values.p[on_i, j] / values.p[on_i, i]
    outcome_term = _sum(values.g[treated, i]) / n
    residual_term = _sum(weight * (values.y[on_i] - values.g[on_i, i])) / n
    return (outcome_term + residual_term) / m_j


def factual_mean(values: NuisanceValues, j: int) -> float:
    treated = values.d == j
    n_j = int(treated.sum())
    if n_j == 0:
        raise EmptyTreatedGroup(j)
    return _sum(values.y[treated]) / n_j


def ipw_diagnostics(values: NuisanceValues) -> Dict[str, float]:
    """Largest inverse-propensity weight applied to an observed row"""
    observed = values.p[np.arange(values.n_rows), values.d]
    return {
        'max_ipw_weight': float(np.max(1.0 / observed)),
        'min_observed_propensity': float(np.min(observed)),
    }


# --- table-level operations -------------------------------------------------

def theta_ioc(table, bundle: NuisanceBundle, i: int) -> float:
    return ioc(nuisance_values(table, bundle), i)


def theta_ioc_conditional(table, bundle: NuisanceBundle, i: int, j: int) -> float:
    return ioc_conditional(nuisance_values(table, bundle), i, j)


def theta_iwc(table, bundle: NuisanceBundle, i: int) -> float:
    return iwc(nuisance_values(table, bundle), i)


def theta_iwc_conditional(table, bundle: NuisanceBundle, i: int, j: int) -> float:
    return iwc_conditional(nuisance_values(table, bundle), i, j)


def theta_dre_conditional(table, bundle: NuisanceBundle, i: int, j: int,
                          m_j: Optional[float] = None) -> float:
    if m_j is None and bundle.m_vals is not None:
        m_j = float(bundle.m_vals[j])
    return dre_conditional(nuisance_values(table, bundle), i, j, m_j)
