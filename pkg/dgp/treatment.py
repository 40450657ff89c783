"""
Treatment law: latent score, quintile assignment and true propensities
"""

from typing import NamedTuple, Optional

import numpy as np
from scipy import stats

from errors import DegenerateScores

from .config import DgpConfig, NoiseLaw
from .features import STREAM_NU, STREAM_RESAMPLE, block_rng, row_blocks

RESAMPLE_CHUNK = 256
PROPENSITY_FLOOR = 1e-300


class TreatmentAssignment(NamedTuple):
    labels: np.ndarray
    levels: np.ndarray
    thresholds: np.ndarray
    scale: float


def treatment_signal(X: np.ndarray, Z: np.ndarray, config: DgpConfig) -> np.ndarray:
    """λ(a1ᵀX + |a2ᵀZ|^γ + b1 X9/(1+|X3|) + b2 X10/(1+|X6|)), before ν"""
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    score = X @ np.asarray(config.a1) + np.abs(Z @ np.asarray(config.a2)) ** config.gamma
    if config.b1 != 0.0:
        score = score + config.b1 * X[:, 8] / (1.0 + np.abs(X[:, 2]))
    if config.b2 != 0.0:
        score = score + config.b2 * X[:, 9] / (1.0 + np.abs(X[:, 5]))
    return config.lam * score


def _nu_unit_scale(config: DgpConfig) -> float:
    """Multiplier turning a standard draw of the ν law into one with sd nu_scale"""
    if config.nu_law == NoiseLaw.STUDENT_T:
        return config.nu_scale * np.sqrt((config.nu_dof - 2.0) / config.nu_dof)
    return config.nu_scale


def _standard_nu(rng: np.random.Generator, config: DgpConfig, size) -> np.ndarray:
    if config.nu_law == NoiseLaw.STUDENT_T:
        return rng.standard_t(config.nu_dof, size=size)
    return rng.standard_normal(size)


def draw_nu(config: DgpConfig, n_rows: int, seed: int) -> np.ndarray:
    nu = np.empty(n_rows)
    for block, start, stop in row_blocks(n_rows):
        nu[start:stop] = _standard_nu(block_rng(seed, STREAM_NU, block), config, stop - start)
    return nu * _nu_unit_scale(config)


def quintile_assignment(scores: np.ndarray, n_levels: int = 5) -> TreatmentAssignment:
    """Standardise, cut at the equally spaced empirical percentiles, take category medians.

    A score equal to a threshold falls in the lower category.
    """
    scores = np.asarray(scores, dtype=float)
    n = len(scores)
    if n < n_levels:
        raise DegenerateScores(f"need at least {n_levels} scores to form {n_levels} categories, got {n}")
    _, counts = np.unique(scores, return_counts=True)
    if counts.max() > 0.2 * n:
        raise DegenerateScores(
            f"{counts.max()} of {n} latent scores share one value; percentile thresholds are ill-defined"
        )
    scale = float(np.std(scores, ddof=1))
    if not scale > 0.0:
        raise DegenerateScores("latent scores have zero spread")

    standardised = scores / scale
    thresholds = np.quantile(standardised, np.arange(1, n_levels) / n_levels)
    labels = np.searchsorted(thresholds, standardised, side='left')
    levels = np.array([np.median(standardised[labels == k]) for k in range(n_levels)])
    return TreatmentAssignment(labels=labels.astype(np.int64), levels=levels,
                               thresholds=thresholds, scale=scale)


def assign_treatment(X: np.ndarray, Z: np.ndarray, nu: np.ndarray,
                     config: DgpConfig) -> TreatmentAssignment:
    return quintile_assignment(treatment_signal(X, Z, config) + np.asarray(nu, dtype=float),
                               config.n_levels)


def labels_from_scores(scores: np.ndarray, thresholds: np.ndarray, scale: float) -> np.ndarray:
    """Categories of raw latent scores against frozen thresholds"""
    return np.searchsorted(thresholds, np.asarray(scores, dtype=float) / scale, side='left').astype(np.int64)


def analytic_propensities(signal: np.ndarray, thresholds: np.ndarray, scale: float,
                          config: DgpConfig) -> np.ndarray:
    """P(D = k | x, z) = F(t_k s - h) - F(t_{k-1} s - h) for the ν law F"""
    signal = np.asarray(signal, dtype=float)
    unit = _nu_unit_scale(config)
    cuts = (np.asarray(thresholds)[None, :] * scale - signal[:, None]) / unit
    law = stats.t(config.nu_dof) if config.nu_law == NoiseLaw.STUDENT_T else stats.norm
    lower = np.hstack([np.full((len(signal), 1), -np.inf), cuts])
    upper = np.hstack([cuts, np.full((len(signal), 1), np.inf)])
    # upper tail through sf keeps precision for large cut points
    probs = np.where(lower > 0, law.sf(lower) - law.sf(upper), law.cdf(upper) - law.cdf(lower))
    probs = np.maximum(probs, PROPENSITY_FLOOR)
    return probs / probs.sum(axis=1, keepdims=True)


def resampled_propensities(signal: np.ndarray, thresholds: np.ndarray, scale: float,
                           config: DgpConfig, seed: int, n_nu: Optional[int] = None) -> np.ndarray:
    """Category frequencies of h + ν over n_nu fresh ν draws per row"""
    signal = np.asarray(signal, dtype=float)
    n_nu = n_nu or config.n_nu
    n_levels = len(thresholds) + 1
    unit = _nu_unit_scale(config)
    out = np.empty((len(signal), n_levels))
    for block, start, stop in row_blocks(len(signal), RESAMPLE_CHUNK):
        rng = block_rng(seed, STREAM_RESAMPLE, block)
        draws = _standard_nu(rng, config, (stop - start, n_nu)) * unit
        labels = labels_from_scores(signal[start:stop, None] + draws, thresholds, scale)
        for k in range(n_levels):
            out[start:stop, k] = np.count_nonzero(labels == k, axis=1) / n_nu
    return out
