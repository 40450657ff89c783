"""
Consistency ladder: the same experiment repeated at increasing N
"""

from typing import List, Optional, Sequence

from config import get_settings
from errors import ConfigError, ImpactError
from metrics import consistency_curve
from run_tracker import RunTracker

from .experiment import ExperimentResult, _run_repetitions, collect_series, load_features
from .persistence import run_directory, write_config, write_ladder, write_repetition
from .settings import ExperimentConfig

ESTIMANDS = ('unconditional', 'conditional')


def _check_ladder(n_list: Sequence[int]) -> List[int]:
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ConfigError("the ladder needs at least one N")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError(f"ladder sizes must be strictly ascending, got {n_list}")
    if n_list[0] < 100:
        raise ConfigError(f"ladder sizes must be at least 100, got {n_list[0]}")
    return n_list


def run_consistency_ladder(config: ExperimentConfig, n_list: Sequence[int],
                           tracker: Optional[RunTracker] = None) -> ExperimentResult:
    """consistency_mean / consistency_std per N, regressor, family and estimand -> ladder.csv"""
    n_list = _check_ladder(n_list)
    settings = get_settings()
    config = config.model_copy(update={'n_rows': n_list[0]})
    run_id = f"{config.run_id()}-ladder"
    directory = run_directory(config.output_dir, run_id)
    write_config(directory, config)
    tracker = tracker or RunTracker(settings.run_log)
    tracker.start_run('ladder', run_id)

    features = load_features(config)
    labels = [spec.label for spec in config.regressors]
    result = ExperimentResult(run_id=run_id, directory=directory)
    rows = []

    print(f"🚀 Ladder {run_id}: N in {n_list}")
    for cell, dgp in config.cells():
        ladders = {label: {} for label in labels}
        for n_rows in n_list:
            slug = f"{cell.slug}/n_{n_rows}" if cell is not None else f"n_{n_rows}"
            outcomes = _run_repetitions(config, dgp, n_rows, features, config.n_jobs)
            for outcome in outcomes:
                m = outcome['repetition']
                if outcome['success']:
                    write_repetition(directory, m, outcome['reports'], slug)
                    tracker.track_repetition(m, True, seconds=outcome['seconds'])
                else:
                    result.failures.append({'cell': slug, 'repetition': m, 'error': outcome['error'],
                                            'error_type': outcome['error_type']})
                    tracker.track_repetition(m, False, outcome['error'], outcome['error_type'],
                                             seconds=outcome['seconds'])
                    print(f"   ❌ {slug} m={m}: {outcome['error_type']}: {outcome['error']}")
            for label, series in collect_series(outcomes, labels, run_id, n_rows).items():
                ladders[label][n_rows] = series
                result.series[(slug, label)] = series

        base = {'alpha': dgp.alpha, 'beta': dgp.beta, 'tail': dgp.tail.value}
        for label in labels:
            if not ladders[label]:
                continue
            for family in config.families:
                for estimand in ESTIMANDS:
                    try:
                        curve = consistency_curve(ladders[label], family, estimand)
                    except ImpactError as e:
                        print(f"⚠️ {label}/{family} {estimand} curve skipped: {e}")
                        continue
                    for point in curve:
                        rows.append({**base, 'regressor': label, 'family': family,
                                     'estimand': estimand, **point})

    write_ladder(directory, rows)
    tracker.end_run()
    print(f"✅ Ladder written to {directory / 'ladder.csv'}")
    return result
