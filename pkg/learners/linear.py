"""
Linear outcome regressors: OLS, RIDGE and LASSO

All three centre the design so the intercept is never penalised.
"""

import warnings
from typing import Tuple

import numpy as np
from scipy import linalg

from errors import ConvergenceWarning, SingularDesign

from .base import FittedOutcomeModel

# singular values below this fraction of the largest are treated as zero
RANK_CUTOFF = 1e-10


def _centre(X: np.ndarray, y: np.ndarray):
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise SingularDesign("design or outcome contains non-finite values")
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    return X - x_mean, y - y_mean, x_mean, y_mean


def fit_ols(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
    """Least squares with the minimum-norm slope vector on rank-deficient designs"""
    Xc, yc, x_mean, y_mean = _centre(X, y)
    if Xc.shape[1] == 0:
        return np.zeros(0), y_mean
    try:
        beta = linalg.lstsq(Xc, yc, cond=RANK_CUTOFF)[0]
    except (linalg.LinAlgError, ValueError) as exc:
        raise SingularDesign(f"least squares failed: {exc}") from exc
    if not np.all(np.isfinite(beta)):
        raise SingularDesign("least squares produced non-finite coefficients")
    return beta, y_mean - float(x_mean @ beta)


def fit_ridge(X: np.ndarray, y: np.ndarray, penalty: float) -> Tuple[np.ndarray, float]:
    """Minimise ||yc - Xc b||^2 + penalty ||b||^2"""
    Xc, yc, x_mean, y_mean = _centre(X, y)
    p = Xc.shape[1]
    if p == 0:
        return np.zeros(0), y_mean
    gram = Xc.T @ Xc + penalty * np.eye(p)
    rhs = Xc.T @ yc
    try:
        beta = linalg.solve(gram, rhs, assume_a='pos')
    except linalg.LinAlgError:
        beta = linalg.lstsq(gram, rhs, cond=RANK_CUTOFF)[0]
    if not np.all(np.isfinite(beta)):
        raise SingularDesign("ridge normal equations produced non-finite coefficients")
    return beta, y_mean - float(x_mean @ beta)


def soft_threshold(value: float, level: float) -> float:
    if value > level:
        return value - level
    if value < -level:
        return value + level
    return 0.0


def fit_lasso(X: np.ndarray, y: np.ndarray, penalty: float, tol: float = 1e-10,
              max_iter: int = 100_000) -> Tuple[np.ndarray, float]:
    """Cyclic coordinate descent on 1/2 ||yc - Xc b||^2 + penalty ||b||_1"""
    Xc, yc, x_mean, y_mean = _centre(X, y)
    p = Xc.shape[1]
    beta = np.zeros(p)
    if p == 0:
        return beta, y_mean

    col_sq = np.einsum('ij,ij->j', Xc, Xc)
    residual = yc.copy()
    for _ in range(max_iter):
        max_step = 0.0
        for k in range(p):
            if col_sq[k] == 0.0:
                continue
            old = beta[k]
            rho = float(Xc[:, k] @ residual) + col_sq[k] * old
            new = soft_threshold(rho, penalty) / col_sq[k]
            if new != old:
                residual -= Xc[:, k] * (new - old)
                beta[k] = new
                max_step = max(max_step, abs(new - old))
        if max_step < tol:
            break
    else:
        warnings.warn(f"LASSO coordinate descent hit max_iter={max_iter}", ConvergenceWarning)
    return beta, y_mean - float(x_mean @ beta)


class LinearOutcomeModel(FittedOutcomeModel):
    """Per-level coefficients, or one joint fit with the level index as last feature"""

    def __init__(self, family: str, coef: np.ndarray, intercept: np.ndarray, per_level: bool,
                 n_levels: int, p_u: int, p_z: int):
        super().__init__(n_levels, p_u, p_z)
        self.family = family
        self.coef = np.atleast_2d(np.asarray(coef, dtype=float))
        self.intercept = np.atleast_1d(np.asarray(intercept, dtype=float))
        self.per_level = bool(per_level)

    def _predict_level(self, level, features):
        if self.per_level:
            return features @ self.coef[level] + self.intercept[level]
        design = np.column_stack([features, np.full(len(features), float(level))])
        return design @ self.coef[0] + self.intercept[0]

    def to_dict(self) -> dict:
        return {
            'family': self.family,
            'per_level': self.per_level,
            'n_levels': self.n_levels,
            'p_u': self.p_u,
            'p_z': self.p_z,
            'coef': self.coef.tolist(),
            'intercept': self.intercept.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearOutcomeModel":
        return cls(data['family'], np.asarray(data['coef']), np.asarray(data['intercept']),
                   data['per_level'], data['n_levels'], data['p_u'], data['p_z'])
