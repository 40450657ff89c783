"""
Evaluation metrics - weighted relative errors, error reduction, consistency
curves and the IwC error decomposition
"""

from .consistency import consistency_curve, consistency_mean, consistency_std
from .decomposition import IwcErrorTerms, decompose_iwc_error, decompose_iwc_error_conditional
from .relative import (
    WeightedError,
    error_reduction,
    weighted_atte_error,
    weighted_ate_error,
    weighted_rel_err_ate,
    weighted_rel_err_atte,
)
from .series import ExperimentSeries

__all__ = [
    'ExperimentSeries',
    'IwcErrorTerms',
    'WeightedError',
    'consistency_curve',
    'consistency_mean',
    'consistency_std',
    'decompose_iwc_error',
    'decompose_iwc_error_conditional',
    'error_reduction',
    'weighted_ate_error',
    'weighted_atte_error',
    'weighted_rel_err_ate',
    'weighted_rel_err_atte',
]
