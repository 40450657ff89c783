"""
Consistency statistics: ratio-of-sums error and the spread of θ̂ - θ across repetitions
"""

import math
from typing import Dict, List, Mapping

import numpy as np

from errors import InsufficientRepetitions, ZeroDenominator

from .series import ExperimentSeries


def consistency_mean(series: ExperimentSeries, family: str, estimand: str = "unconditional") -> float:
    """(1/K) Σ_k |Σ_m θ̂_k;m / Σ_m θ_k;m - 1| over the K estimands.

    Repetitions where an entry is missing are left out of that entry's sums.
    """
    estimates, truths = series.stacked(family, estimand)
    terms = []
    for k in range(truths.shape[1]):
        present = np.isfinite(estimates[:, k]) & np.isfinite(truths[:, k])
        if not present.any():
            continue
        denominator = math.fsum(truths[present, k])
        if denominator == 0.0:
            raise ZeroDenominator(f"true {estimand} estimand {k} sums to zero over the repetitions")
        terms.append(abs(math.fsum(estimates[present, k]) / denominator - 1.0))
    if not terms:
        raise ZeroDenominator(f"no {estimand} estimand observed in any repetition")
    return math.fsum(terms) / len(terms)


def consistency_std(series: ExperimentSeries, family: str, estimand: str = "unconditional") -> float:
    """Mean over estimands of the sample standard deviation (ddof 1) of θ̂ - θ"""
    if series.repetitions < 2:
        raise InsufficientRepetitions(2, series.repetitions)
    estimates, truths = series.stacked(family, estimand)
    diffs = estimates - truths
    spreads = []
    for k in range(diffs.shape[1]):
        column = diffs[np.isfinite(diffs[:, k]), k]
        if len(column) >= 2:
            spreads.append(float(np.std(column, ddof=1)))
    if not spreads:
        raise InsufficientRepetitions(2, 1, f"no {estimand} estimand observed in two repetitions")
    return math.fsum(spreads) / len(spreads)


def consistency_curve(ladder: Mapping[int, ExperimentSeries], family: str,
                      estimand: str = "unconditional") -> List[Dict[str, float]]:
    """One {n_rows, mean, std} point per N, in ascending N"""
    points = []
    for n_rows in sorted(ladder):
        series = ladder[n_rows]
        std = consistency_std(series, family, estimand) if series.repetitions >= 2 else float('nan')
        points.append({
            'n_rows': n_rows,
            'mean': consistency_mean(series, family, estimand),
            'std': std,
        })
    return points
