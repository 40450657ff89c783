"""
Score functions and their moment / orthogonality checks
"""

from .checks import (
    DEFAULT_R_GRID,
    MomentCheck,
    PerturbationDirection,
    SlotDerivative,
    default_direction,
    gateaux_check,
    moment_check,
    random_directions,
)
from .functions import (
    NuisancePoint,
    PointValues,
    ScoreFamily,
    ScoreKind,
    empirical_marginals,
    eval_score,
    score_parts,
    score_values,
    solve_theta,
)

__all__ = [
    'DEFAULT_R_GRID',
    'MomentCheck',
    'NuisancePoint',
    'PerturbationDirection',
    'PointValues',
    'ScoreFamily',
    'ScoreKind',
    'SlotDerivative',
    'default_direction',
    'empirical_marginals',
    'eval_score',
    'gateaux_check',
    'moment_check',
    'random_directions',
    'score_parts',
    'score_values',
    'solve_theta',
]
