"""
Benchmark orchestration - experiments, grids, consistency ladders and score checks
"""

from .checks import ScoreCheckReport, ScoreVerdict, run_score_checks, score_kinds
from .experiment import ExperimentResult, cell_metrics, run_experiment, run_grid, run_repetition
from .ladder import run_consistency_ladder
from .persistence import read_repetition, repetition_path, run_directory
from .settings import ExperimentConfig, KnobCell, repetition_seed

__all__ = [
    'ExperimentConfig',
    'ExperimentResult',
    'KnobCell',
    'ScoreCheckReport',
    'ScoreVerdict',
    'cell_metrics',
    'read_repetition',
    'repetition_path',
    'repetition_seed',
    'run_consistency_ladder',
    'run_directory',
    'run_experiment',
    'run_grid',
    'run_repetition',
    'run_score_checks',
    'score_kinds',
]
