#!/usr/bin/env python3
"""
credit-impact-bench - command-line entry point
Generate synthetic credit data, estimate treatment effects and run the benchmark suites
"""

import argparse
import json
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from config import get_settings  # noqa: E402
from errors import ConfigError, ImpactError  # noqa: E402

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INVALID_CONFIG = 2


def _add_experiment_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--config', help='experiment config JSON; its fields override the flags')
    parser.add_argument('--mode', choices=['simulated', 'semi_synthetic'], default='simulated')
    parser.add_argument('--features', help='feature CSV (u_*, x_*, z_* columns) for semi_synthetic mode')
    parser.add_argument('--n-rows', type=int, default=10_000)
    parser.add_argument('--repetitions', type=int, default=1)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--split', type=float, default=0.7)
    parser.add_argument('--eval-on', choices=['test', 'all'], default='test')
    parser.add_argument('--regressor', action='append', default=None,
                        help='outcome regressor family (repeatable): OLS, RIDGE, LASSO, RANDOM_FOREST, MLP')
    parser.add_argument('--family', action='append', default=None, help='estimator family (repeatable)')
    parser.add_argument('--alpha', type=float, default=None)
    parser.add_argument('--beta', type=float, default=None)
    parser.add_argument('--tail', choices=['light', 'heavy'], default=None)
    parser.add_argument('--grid', action='append', default=None, metavar='ALPHA,BETA,TAIL',
                        help='grid cell (repeatable), e.g. 0.05,0.05,light')
    parser.add_argument('--output-dir', default=None)
    parser.add_argument('--n-jobs', type=int, default=None)
    parser.add_argument('--verbose', action='store_true')


def _parse_cell(text: str) -> dict:
    parts = text.split(',')
    if len(parts) not in (2, 3):
        raise ConfigError(f"grid cell '{text}' must be ALPHA,BETA[,TAIL]")
    try:
        cell = {'alpha': float(parts[0]), 'beta': float(parts[1])}
    except ValueError:
        raise ConfigError(f"grid cell '{text}' has a non-numeric knob") from None
    if len(parts) == 3:
        cell['tail'] = parts[2].strip()
    return cell


def experiment_config(args):
    """Flags first, then the --config file on top"""
    from bench import ExperimentConfig
    from dgp import DgpConfig

    settings = get_settings()
    fields = {
        'mode': args.mode,
        'n_rows': args.n_rows,
        'repetitions': args.repetitions,
        'seed': args.seed,
        'split_fraction': args.split,
        'eval_on': args.eval_on,
        'output_dir': args.output_dir or str(settings.output_dir),
        'n_jobs': args.n_jobs if args.n_jobs is not None else settings.n_jobs,
        'propensity': {'clip': settings.propensity_clip},
    }
    if args.features:
        fields['features_csv'] = args.features
    if args.regressor:
        fields['regressors'] = [{'family': name.upper()} for name in args.regressor]
    if args.family:
        fields['families'] = args.family
    if args.grid:
        fields['grid'] = [_parse_cell(text) for text in args.grid]
    if any(v is not None for v in (args.alpha, args.beta, args.tail)):
        preset = DgpConfig.semi_synthetic() if args.mode == 'semi_synthetic' else DgpConfig.simulated()
        try:
            fields['dgp'] = preset.with_knobs(args.alpha, args.beta, args.tail)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    for name in ('n_mc', 'n_truth', 'check_levels', 'n_directions'):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value

    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        fields.update(overrides)
    return ExperimentConfig.build(**fields)


def _dgp_from_args(args):
    from dgp import DgpConfig

    if args.dgp_config:
        return DgpConfig.load(args.dgp_config)
    preset = DgpConfig.semi_synthetic if args.command == 'semi-synth' else DgpConfig.simulated
    try:
        return preset().with_knobs(args.alpha, args.beta, getattr(args, 'tail', None))
    except ValueError as e:
        raise ConfigError(str(e)) from e


def cmd_simulate(args) -> int:
    from dgp import export_sample, gen_dataset

    config = _dgp_from_args(args)
    print(f"🚀 Generating {args.n_rows} rows (alpha={config.alpha}, beta={config.beta}, tail={config.tail.value})")
    sample = gen_dataset(config, args.n_rows, args.seed)
    data_path, hidden_path = export_sample(sample, args.out)
    print(f"✅ Data: {data_path}")
    print(f"✅ Ground truth: {hidden_path}")
    return EXIT_OK


def cmd_semi_synth(args) -> int:
    from data import read_features_csv
    from dgp import export_sample, gen_semi_synthetic

    config = _dgp_from_args(args)
    features = read_features_csv(args.features)
    print(f"🚀 Regenerating treatments and outcomes on {features[0].shape[0]} feature rows")
    sample = gen_semi_synthetic(features, config, args.seed)
    data_path, hidden_path = export_sample(sample, args.out)
    print(f"✅ Data: {data_path}")
    print(f"✅ Ground truth: {hidden_path}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    import numpy as np

    from data import read_table_csv, split_train_test
    from estimators import NuisanceBundle, full_report
    from learners import OutcomeModelSpec, fit_outcome_model, fit_propensity

    table, coding = read_table_csv(args.data)
    split = split_train_test(table, args.split, args.seed, n_levels=coding.n_levels)
    eval_rows = split.test_rows if args.eval_on == 'test' else np.arange(table.n_rows)
    p_hat = fit_propensity(table, split.train_rows, clip=get_settings().propensity_clip,
                           n_levels=coding.n_levels)
    spec = OutcomeModelSpec(family=args.regressor.upper())
    g_hat = fit_outcome_model(spec, table, split.train_rows, args.seed, n_levels=coding.n_levels)
    report = full_report(table, NuisanceBundle(g_hat, p_hat, eval_rows), levels=coding.levels)
    path = report.save(args.out)

    print(f"\n📊 Estimates on {report.n_eval} rows ({spec.label}):")
    for family, estimates in report.families.items():
        values = ', '.join(f"{v:.4f}" for v in estimates.theta_i)
        print(f"   {family}: θ = [{values}]")
    print(f"✅ Report written to {path}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from bench import run_experiment

    config = experiment_config(args)
    result = run_experiment(config, verbose=args.verbose)
    return EXIT_PARTIAL if result.partial else EXIT_OK


def cmd_ladder(args) -> int:
    from bench import run_consistency_ladder

    config = experiment_config(args)
    result = run_consistency_ladder(config, args.n_list)
    return EXIT_PARTIAL if result.partial else EXIT_OK


def cmd_check_scores(args) -> int:
    from bench import run_score_checks

    config = experiment_config(args)
    run_score_checks(config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='credit-impact-bench', description=__doc__)
    sub = parser.add_subparsers(dest='command', required=True)

    simulate = sub.add_parser('simulate', help='generate a simulated dataset with ground truth')
    simulate.add_argument('--n-rows', type=int, default=10_000)
    simulate.add_argument('--seed', type=int, default=0)
    simulate.add_argument('--alpha', type=float, default=None)
    simulate.add_argument('--beta', type=float, default=None)
    simulate.add_argument('--tail', choices=['light', 'heavy'], default=None)
    simulate.add_argument('--dgp-config', help='DGP config JSON instead of the simulated preset')
    simulate.add_argument('--out', required=True)
    simulate.set_defaults(handler=cmd_simulate)

    semi = sub.add_parser('semi-synth', help='semi-synthetic outcomes on a real feature table')
    semi.add_argument('--features', required=True)
    semi.add_argument('--seed', type=int, default=0)
    semi.add_argument('--alpha', type=float, default=None)
    semi.add_argument('--beta', type=float, default=None)
    semi.add_argument('--dgp-config', help='DGP config JSON instead of the semi-synthetic preset')
    semi.add_argument('--out', required=True)
    semi.set_defaults(handler=cmd_semi_synth)

    estimate = sub.add_parser('estimate', help='IoC / IwC / DRE estimates for an observed CSV')
    estimate.add_argument('--data', required=True)
    estimate.add_argument('--regressor', default='OLS')
    estimate.add_argument('--seed', type=int, default=0)
    estimate.add_argument('--split', type=float, default=0.7)
    estimate.add_argument('--eval-on', choices=['test', 'all'], default='test')
    estimate.add_argument('--out', required=True)
    estimate.set_defaults(handler=cmd_estimate)

    bench = sub.add_parser('bench', help='repeated experiments and the metrics table')
    _add_experiment_flags(bench)
    bench.set_defaults(handler=cmd_bench)

    ladder = sub.add_parser('ladder', help='consistency curves over increasing N')
    _add_experiment_flags(ladder)
    ladder.add_argument('--n-list', type=int, nargs='+', required=True)
    ladder.set_defaults(handler=cmd_ladder)

    checks = sub.add_parser('check-scores', help='moment and orthogonality checks on true nuisances')
    _add_experiment_flags(checks)
    checks.add_argument('--n-mc', type=int, default=None)
    checks.add_argument('--n-truth', type=int, default=None)
    checks.add_argument('--check-levels', type=int, nargs=2, default=None)
    checks.add_argument('--n-directions', type=int, default=None)
    checks.set_defaults(handler=cmd_check_scores)
    return parser


def main(argv=None) -> int:
    """Parse the command line and dispatch; returns the process exit code"""
    args = build_parser().parse_args(argv)
    settings = get_settings()
    if getattr(args, 'verbose', False) or settings.debug:
        settings.report()
    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"❌ Invalid configuration: {e}")
        return EXIT_INVALID_CONFIG
    except ImpactError as e:
        print(f"❌ {type(e).__name__}: {e}")
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
