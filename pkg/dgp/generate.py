"""
SyntheticSample generation and ground truth

gen_dataset draws correlated features and hands them to the same pipeline
gen_semi_synthetic runs on an external feature table, so the two agree
exactly on identical features and seed.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from data import ObservationTable, TreatmentCoding, write_table_csv
from errors import DimensionMismatch, EmptyTreatedGroup
from estimators import FamilyEstimates

from .config import DgpConfig, PropensityTruth
from .features import STREAM_XI, block_rng, row_blocks, sample_features
from .outcome import f_of_d, q_values
from .treatment import (
    analytic_propensities,
    assign_treatment,
    draw_nu,
    resampled_propensities,
    treatment_signal,
)


@dataclass(frozen=True)
class SyntheticSample:
    """Observed table plus every hidden column of the generating law"""

    table: ObservationTable
    coding: TreatmentCoding
    q: np.ndarray
    f_levels: np.ndarray
    g: np.ndarray
    signal: np.ndarray
    latent: np.ndarray
    xi: np.ndarray
    propensity: np.ndarray
    thresholds: np.ndarray
    scale: float

    @property
    def n_rows(self) -> int:
        return self.table.n_rows

    @property
    def n_levels(self) -> int:
        return self.coding.n_levels

    def observed_g(self) -> np.ndarray:
        return self.g[np.arange(self.n_rows), self.table.d]


def draw_xi(n_rows: int, seed: int, scale: float) -> np.ndarray:
    xi = np.empty(n_rows)
    for block, start, stop in row_blocks(n_rows):
        xi[start:stop] = block_rng(seed, STREAM_XI, block).standard_normal(stop - start)
    return xi * scale


def _generate_from_features(U: np.ndarray, X: np.ndarray, Z: np.ndarray, config: DgpConfig,
                            seed: int) -> SyntheticSample:
    n = U.shape[0]
    signal = treatment_signal(X, Z, config)
    latent = signal + draw_nu(config, n, seed)
    assignment = assign_treatment(X, Z, latent - signal, config)

    f_levels = np.asarray(f_of_d(assignment.levels, config), dtype=float)
    q = q_values(U, Z, config)
    g = q[:, None] * f_levels[None, :]
    noiseless = g[np.arange(n), assignment.labels]

    xi_scale = config.xi_ratio * float(np.std(noiseless, ddof=1)) if n > 1 else 0.0
    xi = draw_xi(n, seed, xi_scale)

    if config.propensity_truth == PropensityTruth.ANALYTIC:
        propensity = analytic_propensities(signal, assignment.thresholds, assignment.scale, config)
    else:
        propensity = resampled_propensities(signal, assignment.thresholds, assignment.scale, config, seed)

    table = ObservationTable(y=noiseless + xi, d=assignment.labels, u=U, x=X, z=Z)
    return SyntheticSample(
        table=table,
        coding=TreatmentCoding(tuple(assignment.levels)),
        q=q, f_levels=f_levels, g=g, signal=signal, latent=latent, xi=xi,
        propensity=propensity, thresholds=assignment.thresholds, scale=assignment.scale,
    )


def gen_dataset(config: DgpConfig, n_rows: int, seed: int, n_jobs: int = 1) -> SyntheticSample:
    U, X, Z = sample_features(config, n_rows, seed, n_jobs=n_jobs)
    return _generate_from_features(U, X, Z, config, seed)


def gen_semi_synthetic(features: Tuple[np.ndarray, np.ndarray, np.ndarray], config: DgpConfig,
                       seed: int) -> SyntheticSample:
    """Regenerate treatments and outcomes on a given (U, X, Z) feature table"""
    U, X, Z = (np.atleast_2d(np.asarray(block, dtype=float)) for block in features)
    for block, name, expected in ((U, 'history features u', config.p_u),
                                  (X, 'treatment features x', config.p_x),
                                  (Z, 'confounders z', config.p_z)):
        if block.shape[1] != expected:
            raise DimensionMismatch(name, expected, block.shape[1])
    if not U.shape[0] == X.shape[0] == Z.shape[0]:
        raise DimensionMismatch("feature rows", U.shape[0], min(X.shape[0], Z.shape[0]))
    return _generate_from_features(U, X, Z, config, seed)


def truth_from_counterfactuals(g: np.ndarray, d: np.ndarray, n_levels: Optional[int] = None,
                               allow_missing: bool = False) -> FamilyEstimates:
    """θ^i = mean of g(d^i, ·), θ^{i|j} = the same mean over the level-j rows"""
    g = np.asarray(g, dtype=float)
    d = np.asarray(d, dtype=np.int64)
    n = n_levels or g.shape[1]
    theta_i = g.mean(axis=0).tolist()
    conditional = [[None] * n for _ in range(n)]
    for j in range(n):
        rows = d == j
        if not rows.any():
            if allow_missing:
                continue
            raise EmptyTreatedGroup(j)
        means = g[rows].mean(axis=0)
        for i in range(n):
            conditional[i][j] = float(means[i])
    return FamilyEstimates.compose(theta_i, conditional)


def ground_truth(sample: SyntheticSample, eval_rows: Optional[Sequence[int]] = None,
                 allow_missing: bool = False) -> FamilyEstimates:
    rows = np.arange(sample.n_rows) if eval_rows is None else np.asarray(eval_rows, dtype=np.int64)
    return truth_from_counterfactuals(sample.g[rows], sample.table.d[rows], sample.n_levels,
                                      allow_missing=allow_missing)


def hidden_frame(sample: SyntheticSample) -> pd.DataFrame:
    n = sample.n_levels
    columns = {'q': sample.q, 'signal': sample.signal, 'latent': sample.latent, 'xi': sample.xi}
    for k in range(n):
        columns[f'f_{k + 1}'] = np.full(sample.n_rows, sample.f_levels[k])
    for k in range(n):
        columns[f'g_{k + 1}'] = sample.g[:, k]
    for k in range(n):
        columns[f'p_{k + 1}'] = sample.propensity[:, k]
    return pd.DataFrame(columns)


def export_sample(sample: SyntheticSample, path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write the observed CSV and a `<name>.hidden.csv` sidecar of ground-truth columns"""
    path = write_table_csv(sample.table, sample.coding, path)
    sidecar = path.with_name(f"{path.stem}.hidden.csv")
    hidden_frame(sample).to_csv(sidecar, index=False, float_format='%.17g')
    return path, sidecar
