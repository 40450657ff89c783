"""
Run directory layout and the deterministic artifacts written into it

    <output_dir>/<run-id>/config.json
    <output_dir>/<run-id>/reports/[<cell>/]m_<k>.json
    <output_dir>/<run-id>/metrics.csv
    <output_dir>/<run-id>/ladder.csv
    <output_dir>/<run-id>/checks.json
"""

import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import pandas as pd

from estimators import EstimateReport

METRIC_COLUMNS = ['alpha', 'beta', 'tail', 'regressor', 'family', 'metric', 'value']
LADDER_COLUMNS = ['alpha', 'beta', 'tail', 'n_rows', 'regressor', 'family', 'estimand', 'mean', 'std']
FLOAT_FORMAT = '%.17g'


def run_directory(output_dir: Union[str, Path], run_id: str) -> Path:
    path = Path(output_dir) / run_id
    (path / 'reports').mkdir(parents=True, exist_ok=True)
    return path


def _dump(payload, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def write_config(directory: Path, config) -> Path:
    return _dump(json.loads(config.model_dump_json()), directory / 'config.json')


def repetition_path(directory: Path, repetition: int, cell: Optional[str] = None) -> Path:
    reports = directory / 'reports'
    if cell:
        reports = reports / cell
    return reports / f'm_{repetition}.json'


def write_repetition(directory: Path, repetition: int, reports: Dict[str, EstimateReport],
                     cell: Optional[str] = None) -> Path:
    payload = {label: json.loads(report.model_dump_json()) for label, report in reports.items()}
    return _dump(payload, repetition_path(directory, repetition, cell))


def read_repetition(path: Union[str, Path]) -> Dict[str, EstimateReport]:
    with open(path, 'r') as f:
        payload = json.load(f)
    return {label: EstimateReport.model_validate(data) for label, data in payload.items()}


def write_table(rows: Iterable[dict], columns: List[str], path: Path) -> Path:
    frame = pd.DataFrame(list(rows), columns=columns)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_metrics(directory: Path, rows: Iterable[dict]) -> Path:
    return write_table(rows, METRIC_COLUMNS, directory / 'metrics.csv')


def write_ladder(directory: Path, rows: Iterable[dict]) -> Path:
    return write_table(rows, LADDER_COLUMNS, directory / 'ladder.csv')


def write_checks(directory: Path, payload: dict) -> Path:
    return _dump(payload, directory / 'checks.json')
