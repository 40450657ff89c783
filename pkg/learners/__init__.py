"""
Nuisance learners - outcome regressors ĝ(d, u, z) and propensity models P̂_i(x, z)
"""

from .base import (
    CallableOutcomeModel,
    FittedOutcomeModel,
    OutcomeFamily,
    OutcomeModelSpec,
    predict_outcome,
)
from .fitting import fit_outcome_model, load_model, model_from_dict, save_model
from .forest import ForestOutcomeModel
from .linear import LinearOutcomeModel, fit_lasso, fit_ols, fit_ridge
from .mlp import MlpOutcomeModel
from .propensity import (
    CallablePropensityModel,
    FittedPropensityModel,
    LogisticPropensityModel,
    PropensitySettings,
    TabulatedPropensityModel,
    clip_probabilities,
    fit_propensity,
    predict_propensity,
)

__all__ = [
    'CallableOutcomeModel',
    'CallablePropensityModel',
    'FittedOutcomeModel',
    'FittedPropensityModel',
    'ForestOutcomeModel',
    'LinearOutcomeModel',
    'LogisticPropensityModel',
    'MlpOutcomeModel',
    'OutcomeFamily',
    'OutcomeModelSpec',
    'PropensitySettings',
    'TabulatedPropensityModel',
    'clip_probabilities',
    'fit_lasso',
    'fit_ols',
    'fit_outcome_model',
    'fit_propensity',
    'fit_ridge',
    'load_model',
    'model_from_dict',
    'predict_outcome',
    'predict_propensity',
    'save_model',
]
