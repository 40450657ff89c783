"""
Outcome model fitting dispatch and JSON persistence for fitted learners
"""

import json
from pathlib import Path
from typing import Optional, Union

import numpy as np

from errors import ConfigError, LevelMissingInTrain

from .base import FittedOutcomeModel, OutcomeFamily, OutcomeModelSpec
from .forest import ForestOutcomeModel, grow_forest
from .linear import LinearOutcomeModel, fit_lasso, fit_ols, fit_ridge
from .mlp import MlpOutcomeModel, train_network
from .propensity import LogisticPropensityModel


def _fit_linear(spec: OutcomeModelSpec, X: np.ndarray, y: np.ndarray):
    if spec.family == OutcomeFamily.OLS:
        return fit_ols(X, y)
    if spec.family == OutcomeFamily.RIDGE:
        return fit_ridge(X, y, spec.penalty)
    return fit_lasso(X, y, spec.penalty, spec.tol, spec.max_iter)


def fit_outcome_model(spec: OutcomeModelSpec, table, train_rows, seed: int,
                      n_levels: Optional[int] = None) -> FittedOutcomeModel:
    """Fit ĝ on the train rows; per-level fits need every level present"""
    rows = np.asarray(train_rows, dtype=np.int64)
    if rows.size == 0:
        raise ConfigError("cannot fit an outcome model on an empty train split")
    n_levels = int(n_levels if n_levels is not None else table.d.max() + 1)
    features = np.hstack([table.u[rows], table.z[rows]])
    y = table.y[rows]
    d = table.d[rows]
    per_level = spec.resolved_per_level()

    if per_level:
        groups = []
        for level in range(n_levels):
            mask = d == level
            if not mask.any():
                raise LevelMissingInTrain(level)
            groups.append((features[mask], y[mask]))
    else:
        groups = [(np.column_stack([features, d.astype(float)]), y)]

    dims = dict(n_levels=n_levels, p_u=table.p_u, p_z=table.p_z)

    if spec.family.is_linear:
        fits = [_fit_linear(spec, X, target) for X, target in groups]
        coef = np.stack([beta for beta, _ in fits])
        intercept = np.array([b0 for _, b0 in fits])
        return LinearOutcomeModel(spec.family.value, coef, intercept, per_level, **dims)

    if spec.family == OutcomeFamily.RANDOM_FOREST:
        forests = [
            grow_forest(X, target, seed + k, spec.n_trees, spec.max_depth, spec.min_leaf,
                        spec.feature_subsample, spec.bootstrap)
            for k, (X, target) in enumerate(groups)
        ]
        return ForestOutcomeModel(forests, per_level, **dims)

    trained = [
        train_network(X, target, spec.hidden, spec.learning_rate, spec.epochs, spec.batch_size, seed + k)
        for k, (X, target) in enumerate(groups)
    ]
    nets, x_mean, x_scale, y_mean, y_scale = (list(col) for col in zip(*trained))
    return MlpOutcomeModel(nets, x_mean, x_scale, y_mean, y_scale, per_level, hidden=spec.hidden, **dims)


_OUTCOME_LOADERS = {
    'OLS': LinearOutcomeModel.from_dict,
    'RIDGE': LinearOutcomeModel.from_dict,
    'LASSO': LinearOutcomeModel.from_dict,
    'RANDOM_FOREST': ForestOutcomeModel.from_dict,
    'MLP': MlpOutcomeModel.from_dict,
    'MULTINOMIAL_LOGISTIC': LogisticPropensityModel.from_dict,
}


def model_from_dict(data: dict):
    try:
        loader = _OUTCOME_LOADERS[data['family']]
    except KeyError:
        raise ConfigError(f"unknown model family tag {data.get('family')!r}") from None
    return loader(data)


def save_model(model, path: Union[str, Path]) -> Path:
    """Write a fitted learner as JSON (family tag + parameter arrays)"""
    if not hasattr(model, 'to_dict'):
        raise ConfigError(f"{type(model).__name__} does not support serialisation")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(model.to_dict(), f)
    return path


def load_model(path: Union[str, Path]):
    with open(path, 'r') as f:
        return model_from_dict(json.load(f))
