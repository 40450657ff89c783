"""
Data-generating process - correlated features, the f(D) q(U, Z) outcome law,
quintile treatment assignment and exact counterfactual ground truth
"""

from .config import (
    BlockCorrelation,
    DgpConfig,
    KMode,
    NoiseLaw,
    PropensityTruth,
    Tail,
    knob_tuple,
)
from .features import correlation_matrix, factor, sample_features
from .generate import (
    SyntheticSample,
    export_sample,
    gen_dataset,
    gen_semi_synthetic,
    ground_truth,
    hidden_frame,
    truth_from_counterfactuals,
)
from .outcome import f_of_d, interaction_vector, k_of, k_values, q_of, q_values
from .sampler import DgpSampler, TrueOutcomeModel, TruePropensityModel
from .treatment import (
    TreatmentAssignment,
    analytic_propensities,
    assign_treatment,
    labels_from_scores,
    quintile_assignment,
    resampled_propensities,
    treatment_signal,
)

__all__ = [
    'BlockCorrelation',
    'DgpConfig',
    'DgpSampler',
    'KMode',
    'NoiseLaw',
    'PropensityTruth',
    'SyntheticSample',
    'Tail',
    'TreatmentAssignment',
    'TrueOutcomeModel',
    'TruePropensityModel',
    'analytic_propensities',
    'assign_treatment',
    'correlation_matrix',
    'export_sample',
    'f_of_d',
    'factor',
    'gen_dataset',
    'gen_semi_synthetic',
    'ground_truth',
    'hidden_frame',
    'interaction_vector',
    'k_of',
    'k_values',
    'knob_tuple',
    'labels_from_scores',
    'q_of',
    'q_values',
    'quintile_assignment',
    'resampled_propensities',
    'sample_features',
    'treatment_signal',
    'truth_from_counterfactuals',
]
