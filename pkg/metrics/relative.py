"""
Weighted relative errors of ATE / ATTE estimates and the |IwC/IoC - 1| reduction
"""

import math
import warnings
from typing import List, NamedTuple

import numpy as np

from errors import AllTrueEffectsZero, DivisionByZeroErr, NoValidTriples

from .series import ExperimentSeries

ZERO_EFFECT = 1e-12


class WeightedError(NamedTuple):
    value: float
    dropped: int
    repetitions: int


def _weighted(estimates: np.ndarray, truths: np.ndarray):
    """Σ w |θ̂/θ - 1| with w ∝ |θ| over the usable entries, or None if none are usable"""
    usable = np.isfinite(truths) & np.isfinite(estimates) & (np.abs(truths) >= ZERO_EFFECT)
    dropped = int(np.count_nonzero(~usable))
    if not usable.any():
        return None, dropped
    theta, theta_hat = truths[usable], estimates[usable]
    weights = np.abs(theta) / math.fsum(np.abs(theta))
    return math.fsum(weights * np.abs(theta_hat / theta - 1.0)), dropped


def _average(per_rep: List[float], dropped: int, effect: str, family: str, reps: int) -> WeightedError:
    if not per_rep:
        raise AllTrueEffectsZero(f"every true {effect} is zero; {family} weighted error undefined")
    if dropped:
        warnings.warn(f"{dropped} {effect} entries with |true effect| < {ZERO_EFFECT:g} dropped "
                      f"from the {family} weighted error")
    return WeightedError(value=math.fsum(per_rep) / len(per_rep), dropped=dropped, repetitions=reps)


def weighted_ate_error(series: ExperimentSeries, family: str) -> WeightedError:
    n = series.n_levels
    off = ~np.eye(n, dtype=bool)
    per_rep, dropped = [], 0
    for report in series.reports:
        value, lost = _weighted(report.family(family).ate_array()[off], report.truth.ate_array()[off])
        dropped += lost
        if value is not None:
            per_rep.append(value)
    return _average(per_rep, dropped, "ATE", family, series.repetitions)


def _triple_mask(n: int) -> np.ndarray:
    i, k, j = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing='ij')
    return (i != k) & (j != i) & (j != k)


def weighted_atte_error(series: ExperimentSeries, family: str) -> WeightedError:
    n = series.n_levels
    mask = _triple_mask(n)
    if not mask.any():
        raise NoValidTriples(f"{n} treatment levels admit no triple with i, k, j distinct")
    per_rep, dropped = [], 0
    for report in series.reports:
        value, lost = _weighted(report.family(family).atte_array()[mask], report.truth.atte_array()[mask])
        dropped += lost
        if value is not None:
            per_rep.append(value)
    return _average(per_rep, dropped, "ATTE", family, series.repetitions)


def weighted_rel_err_ate(series: ExperimentSeries, family: str) -> float:
    """Mean over repetitions of the |θ|-weighted relative ATE error over ordered pairs i != k"""
    return weighted_ate_error(series, family).value


def weighted_rel_err_atte(series: ExperimentSeries, family: str) -> float:
    """As weighted_rel_err_ate over the triples (i, k, j) with j outside {i, k}"""
    return weighted_atte_error(series, family).value


def error_reduction(ioc_err: float, iwc_err: float) -> float:
    if not ioc_err > 0:
        raise DivisionByZeroErr(f"IoC error must be positive, got {ioc_err}")
    return abs(iwc_err / ioc_err - 1.0)
