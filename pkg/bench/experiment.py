"""
Benchmark orchestration: repetitions, grids and the metrics table

Each repetition is a pure function of (config, cell, m): derive the
sub-seed, generate data, split, fit nuisances on train, estimate and score
against the ground truth on the evaluation rows. Failed repetitions are
recorded and the run carries on.
"""

import time
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from config import get_settings
from data import read_features_csv, split_train_test
from dgp import DgpConfig, gen_dataset, gen_semi_synthetic, ground_truth
from errors import AllTrueEffectsZero, NoValidTriples
from estimators import NuisanceBundle, full_report
from learners import fit_outcome_model, fit_propensity
from metrics import ExperimentSeries, error_reduction, weighted_atte_error, weighted_ate_error
from run_tracker import RunTracker

from .persistence import run_directory, write_config, write_metrics, write_repetition
from .settings import ExperimentConfig, KnobCell, repetition_seed

Features = Tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass
class ExperimentResult:
    run_id: str
    directory: object
    series: Dict[Tuple[str, str], ExperimentSeries] = field(default_factory=dict)
    failures: List[dict] = field(default_factory=list)
    metrics: List[dict] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.failures)


def _subsample(features: Features, n_rows: int, seed: int) -> Features:
    total = features[0].shape[0]
    if n_rows >= total:
        return features
    rows = np.sort(np.random.default_rng(seed).choice(total, size=n_rows, replace=False))
    return tuple(block[rows] for block in features)


def run_repetition(config: ExperimentConfig, dgp: DgpConfig, repetition: int, n_rows: int,
                   features: Optional[Features] = None) -> dict:
    """One repetition; returns {'success', 'repetition', 'reports', 'seconds'} or the error"""
    sub_seed = repetition_seed(config.seed, repetition)
    started = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            if features is None:
                sample = gen_dataset(dgp, n_rows, sub_seed)
            else:
                sample = gen_semi_synthetic(_subsample(features, n_rows, sub_seed), dgp, sub_seed)
            table = sample.table
            n_levels = sample.n_levels

            split = split_train_test(table, config.split_fraction, sub_seed, n_levels=n_levels)
            eval_rows = split.test_rows if config.eval_on == 'test' else np.arange(table.n_rows)
            settings = config.propensity
            p_hat = fit_propensity(
                table, split.train_rows, l2_penalty=settings.l2_penalty, max_iter=settings.max_iter,
                tol=settings.tol, seed=sub_seed, clip=settings.clip,
                separation_bound=settings.separation_bound, n_levels=n_levels,
            )
            truth = ground_truth(sample, eval_rows, allow_missing=True)

            reports = {}
            for spec in config.regressors:
                g_hat = fit_outcome_model(spec, table, split.train_rows, sub_seed, n_levels=n_levels)
                bundle = NuisanceBundle(g_hat=g_hat, p_hat=p_hat, eval_rows=eval_rows)
                reports[spec.label] = full_report(table, bundle, levels=sample.coding.levels,
                                                  truth=truth, families=config.families)

        messages = sorted({str(w.message) for w in caught})
        if messages:
            for report in reports.values():
                report.diagnostics['warnings'] = messages
        return {'success': True, 'repetition': repetition, 'reports': reports,
                'seconds': time.perf_counter() - started}
    except Exception as e:
        return {
            'success': False,
            'repetition': repetition,
            'error': str(e),
            'error_type': type(e).__name__,
            'seconds': time.perf_counter() - started,
        }


def _run_repetitions(config: ExperimentConfig, dgp: DgpConfig, n_rows: int,
                     features: Optional[Features], n_jobs: int) -> List[dict]:
    indices = range(config.repetitions)
    if n_jobs == 1 or config.repetitions == 1:
        results = [run_repetition(config, dgp, m, n_rows, features) for m in indices]
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(run_repetition)(config, dgp, m, n_rows, features) for m in indices
        )
    return sorted(results, key=lambda result: result['repetition'])


def cell_metrics(cell: Optional[KnobCell], dgp: DgpConfig, label: str, series: ExperimentSeries,
                 families: Sequence[str]) -> List[dict]:
    """Weighted ATE / ATTE errors per family and their reduction against IoC"""
    base = {'alpha': dgp.alpha, 'beta': dgp.beta, 'tail': dgp.tail.value, 'regressor': label}
    errors: Dict[Tuple[str, str], float] = {}
    rows = []
    for family in families:
        for metric, compute in (('weighted_ate_error', weighted_ate_error),
                                ('weighted_atte_error', weighted_atte_error)):
            try:
                value = compute(series, family).value
            except (AllTrueEffectsZero, NoValidTriples) as e:
                print(f"⚠️ {label}/{family} {metric} skipped: {e}")
                continue
            errors[(family, metric)] = value
            rows.append({**base, 'family': family, 'metric': metric, 'value': value})

    for family in families:
        if family == 'IoC':
            continue
        for effect in ('ate', 'atte'):
            metric = f'weighted_{effect}_error'
            ioc, other = errors.get(('IoC', metric)), errors.get((family, metric))
            if ioc is None or other is None or ioc <= 0:
                continue
            rows.append({**base, 'family': family, 'metric': f'{effect}_error_reduction',
                         'value': error_reduction(ioc, other)})
    return rows


def collect_series(results: List[dict], labels: Sequence[str], fingerprint: str,
                   n_rows: int) -> Dict[str, ExperimentSeries]:
    succeeded = [result for result in results if result['success']]
    if not succeeded:
        return {}
    return {
        label: ExperimentSeries.from_reports([r['reports'][label] for r in succeeded],
                                             fingerprint=fingerprint, n_rows=n_rows)
        for label in labels
    }


def load_features(config: ExperimentConfig) -> Optional[Features]:
    if config.mode != 'semi_synthetic':
        return None
    return read_features_csv(config.features_csv)


def run_experiment(config: ExperimentConfig, tracker: Optional[RunTracker] = None,
                   verbose: bool = False) -> ExperimentResult:
    """Run every grid cell (or the single configured DGP) and persist reports and metrics"""
    settings = get_settings()
    verbose = verbose or settings.debug
    run_id = config.run_id()
    directory = run_directory(config.output_dir, run_id)
    write_config(directory, config)
    tracker = tracker or RunTracker(settings.run_log)
    tracker.start_run('bench', run_id)

    features = load_features(config)
    labels = [spec.label for spec in config.regressors]
    result = ExperimentResult(run_id=run_id, directory=directory)

    print(f"🚀 Run {run_id}: {len(config.cells())} cell(s) x {config.repetitions} repetition(s)")
    for cell, dgp in config.cells():
        slug = cell.slug if cell is not None else None
        outcomes = _run_repetitions(config, dgp, config.n_rows, features, config.n_jobs)
        for outcome in outcomes:
            m = outcome['repetition']
            if outcome['success']:
                write_repetition(directory, m, outcome['reports'], slug)
                tracker.track_repetition(m, True, seconds=outcome['seconds'])
                if verbose:
                    print(f"   ✅ {slug or 'run'} m={m}")
            else:
                failure = {k: outcome[k] for k in ('repetition', 'error', 'error_type')}
                failure['cell'] = slug
                result.failures.append(failure)
                tracker.track_repetition(m, False, outcome['error'], outcome['error_type'],
                                         seconds=outcome['seconds'])
                print(f"   ❌ {slug or 'run'} m={m}: {outcome['error_type']}: {outcome['error']}")

        for label, series in collect_series(outcomes, labels, run_id, config.n_rows).items():
            result.series[(slug or '', label)] = series
            result.metrics.extend(cell_metrics(cell, dgp, label, series, config.families))

    write_metrics(directory, result.metrics)
    tracker.end_run()
    print(f"✅ Results written to {directory}")
    return result


def run_grid(config: ExperimentConfig, cells: Sequence[KnobCell],
             tracker: Optional[RunTracker] = None) -> ExperimentResult:
    """run_experiment over the given (α, β, tail) cells"""
    return run_experiment(config.model_copy(update={'grid': list(cells)}), tracker)
