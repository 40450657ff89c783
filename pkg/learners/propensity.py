"""
Propensity models P_i(x, z) and the clip-and-renormalise rule

The logistic model maximises the mean multinomial log-likelihood minus
(l2/2)||slopes||^2 on standardised features by full-batch gradient ascent
with Armijo backtracking.
"""

import warnings
from abc import ABC, abstractmethod
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import log_softmax, softmax

from errors import ConfigError, ConvergenceWarning, DimensionMismatch, SeparationWarning

DEFAULT_CLIP = 1e-3


class PropensitySettings(BaseModel):
    l2_penalty: float = Field(1e-3, ge=0.0)
    max_iter: int = Field(1000, ge=1)
    tol: float = Field(1e-6, gt=0.0)
    clip: float = Field(DEFAULT_CLIP, gt=0.0, lt=0.5)
    separation_bound: float = Field(30.0, gt=0.0)


def clip_probabilities(probs: np.ndarray, eps: float) -> np.ndarray:
    """Floor every entry at eps and rescale the rest to the remaining mass.

    Repeats until no rescaled entry falls below eps, so each row ends in
    [eps, 1 - (n-1) eps] and sums to one.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    n = probs.shape[1]
    if eps * n >= 1.0:
        raise ConfigError(f"clip bound {eps} too large for {n} levels")
    probs = probs / probs.sum(axis=1, keepdims=True)
    fixed = np.zeros(probs.shape, dtype=bool)
    out = probs.copy()
    for _ in range(n):
        newly = (out < eps) & ~fixed
        if not newly.any():
            break
        fixed |= newly
        free_mass = 1.0 - eps * fixed.sum(axis=1, keepdims=True)
        free_sum = np.where(fixed, 0.0, probs).sum(axis=1, keepdims=True)
        free_sum = np.where(free_sum > 0, free_sum, 1.0)
        out = np.where(fixed, eps, probs * free_mass / free_sum)
    return out


class FittedPropensityModel(ABC):
    """Maps (x, z) rows to a clipped probability vector over the n levels"""

    def __init__(self, n_levels: int, p_x: int, p_z: int, clip: float = DEFAULT_CLIP):
        self.n_levels = int(n_levels)
        self.p_x = int(p_x)
        self.p_z = int(p_z)
        self.clip = float(clip)

    def _features(self, x, z) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if x.shape[1] != self.p_x:
            raise DimensionMismatch("treatment features x", self.p_x, x.shape[1])
        if z.shape[1] != self.p_z:
            raise DimensionMismatch("confounders z", self.p_z, z.shape[1])
        return np.hstack([x, z])

    @abstractmethod
    def raw_proba(self, x, z) -> np.ndarray:
        ...

    def predict_proba(self, x, z) -> np.ndarray:
        return clip_probabilities(self.raw_proba(x, z), self.clip)


class LogisticPropensityModel(FittedPropensityModel):
    family = "MULTINOMIAL_LOGISTIC"

    def __init__(self, weights: np.ndarray, feature_mean: np.ndarray, feature_scale: np.ndarray,
                 n_levels: int, p_x: int, p_z: int, clip: float = DEFAULT_CLIP,
                 converged: bool = True, n_iter: int = 0):
        super().__init__(n_levels, p_x, p_z, clip)
        # column 0 is the intercept
        self.weights = np.asarray(weights, dtype=float)
        self.feature_mean = np.asarray(feature_mean, dtype=float)
        self.feature_scale = np.asarray(feature_scale, dtype=float)
        self.converged = bool(converged)
        self.n_iter = int(n_iter)

    def _design(self, features: np.ndarray) -> np.ndarray:
        scaled = (features - self.feature_mean) / self.feature_scale
        return np.column_stack([np.ones(len(features)), scaled])

    def raw_proba(self, x, z):
        return softmax(self._design(self._features(x, z)) @ self.weights.T, axis=1)

    def to_dict(self) -> dict:
        return {
            'family': self.family,
            'n_levels': self.n_levels,
            'p_x': self.p_x,
            'p_z': self.p_z,
            'clip': self.clip,
            'weights': self.weights.tolist(),
            'feature_mean': self.feature_mean.tolist(),
            'feature_scale': self.feature_scale.tolist(),
            'converged': self.converged,
            'n_iter': self.n_iter,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogisticPropensityModel":
        return cls(np.asarray(data['weights']), np.asarray(data['feature_mean']),
                   np.asarray(data['feature_scale']), data['n_levels'], data['p_x'], data['p_z'],
                   data['clip'], data.get('converged', True), data.get('n_iter', 0))


class CallablePropensityModel(FittedPropensityModel):
    """Wraps fn(x, z) -> N x n raw probabilities"""

    family = "CALLABLE"

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], n_levels: int,
                 p_x: int, p_z: int, clip: float = DEFAULT_CLIP):
        super().__init__(n_levels, p_x, p_z, clip)
        self.fn = fn

    def raw_proba(self, x, z):
        features = self._features(x, z)
        return np.asarray(self.fn(features[:, :self.p_x], features[:, self.p_x:]), dtype=float)


class TabulatedPropensityModel(FittedPropensityModel):
    """Looks up listed probability vectors by exact (x, z) match"""

    family = "TABULATED"

    def __init__(self, x_rows: np.ndarray, z_rows: np.ndarray, probs: np.ndarray,
                 clip: float = DEFAULT_CLIP):
        x_rows = np.atleast_2d(np.asarray(x_rows, dtype=float))
        z_rows = np.atleast_2d(np.asarray(z_rows, dtype=float))
        probs = np.atleast_2d(np.asarray(probs, dtype=float))
        super().__init__(probs.shape[1], x_rows.shape[1], z_rows.shape[1], clip)
        self.table = {tuple(k): p for k, p in zip(np.hstack([x_rows, z_rows]), probs)}

    def raw_proba(self, x, z):
        features = self._features(x, z)
        try:
            return np.stack([self.table[tuple(row)] for row in features])
        except KeyError as exc:
            raise KeyError(f"no tabulated propensity for features {exc.args[0]}") from None


def _objective(W, design, onehot, l2):
    logp = log_softmax(design @ W.T, axis=1)
    return float(np.mean(np.sum(onehot * logp, axis=1)) - 0.5 * l2 * np.sum(W[:, 1:] ** 2))


def _gradient(W, design, onehot, l2):
    probs = softmax(design @ W.T, axis=1)
    grad = (onehot - probs).T @ design / len(design)
    grad[:, 1:] -= l2 * W[:, 1:]
    return grad


def fit_propensity(table, train_rows, l2_penalty: float = 1e-3, max_iter: int = 1000,
                   tol: float = 1e-6, seed: Optional[int] = None, clip: float = DEFAULT_CLIP,
                   separation_bound: float = 30.0, n_levels: Optional[int] = None) -> LogisticPropensityModel:
    """Penalised multinomial logistic regression of d on (x, z).

    Full-batch ascent starts from zero weights, or from N(0, 1e-3^2) weights
    drawn from `seed`; the fitted probabilities agree up to the tolerance.
    """
    rows = np.asarray(train_rows, dtype=np.int64)
    labels = table.d[rows]
    n_levels = int(n_levels if n_levels is not None else table.d.max() + 1)
    if np.unique(labels).size < 2:
        raise ConfigError("propensity fit needs at least 2 distinct levels in the train rows")

    features = np.hstack([table.x[rows], table.z[rows]])
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    design = np.column_stack([np.ones(len(rows)), (features - mean) / scale])
    onehot = np.eye(n_levels)[labels]

    W = np.zeros((n_levels, design.shape[1]))
    if seed is not None:
        W = np.random.default_rng(seed).normal(scale=1e-3, size=W.shape)
    value = _objective(W, design, onehot, l2_penalty)
    step = 1.0
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        grad = _gradient(W, design, onehot, l2_penalty)
        if np.max(np.abs(grad)) < tol:
            converged = True
            break
        sq_norm = float(np.sum(grad ** 2))
        step = min(step * 2.0, 1e6)
        while True:
            candidate = W + step * grad
            new_value = _objective(candidate, design, onehot, l2_penalty)
            if new_value >= value + 1e-4 * step * sq_norm or step < 1e-12:
                break
            step *= 0.5
        W, value = candidate, new_value

    if not converged:
        warnings.warn(f"propensity fit stopped at max_iter={max_iter}", ConvergenceWarning)
    if np.max(np.abs(W)) > separation_bound:
        warnings.warn(
            f"propensity weights exceed {separation_bound} (max {np.max(np.abs(W)):.3g}); "
            "levels may be separable",
            SeparationWarning,
        )
    return LogisticPropensityModel(W, mean, scale, n_levels, table.p_x, table.p_z, clip,
                                   converged=converged, n_iter=iteration)


def predict_propensity(model: FittedPropensityModel, x_row, z_row) -> np.ndarray:
    return model.predict_proba(np.reshape(x_row, (1, -1)), np.reshape(z_row, (1, -1)))[0]
