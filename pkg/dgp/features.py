"""
Correlated feature blocks U, X, Z

Rows are generated in fixed-size blocks, each drawing from its own Philox
substream keyed by (seed, stream, block), so the result does not depend on
how blocks are scheduled.
"""

from typing import Dict, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg

from errors import FactorizationFailure

from .config import BlockCorrelation, DgpConfig, Tail

BLOCK_ROWS = 4096

STREAM_FEATURES = 0
STREAM_NU = 1
STREAM_XI = 2
STREAM_RESAMPLE = 3


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(sequence))


def row_blocks(n_rows: int, block_rows: int = BLOCK_ROWS):
    for block, start in enumerate(range(0, n_rows, block_rows)):
        yield block, start, min(start + block_rows, n_rows)


def correlation_matrix(p: int, a: float, b: float) -> np.ndarray:
    lag = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    return a + (1.0 - a) * np.exp(-b * lag)


def factor(matrix: np.ndarray) -> np.ndarray:
    """Lower factor L with L Lᵀ = matrix; PSD matrices fall back to eigh"""
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        pass
    try:
        eigvals, eigvecs = linalg.eigh(matrix)
    except linalg.LinAlgError as exc:
        raise FactorizationFailure(f"cannot factor correlation matrix: {exc}") from exc
    scale = max(float(np.max(np.abs(eigvals))), 1.0)
    if np.min(eigvals) < -1e-10 * scale:
        raise FactorizationFailure(
            f"correlation matrix is not positive semi-definite (min eigenvalue {np.min(eigvals):.3g})"
        )
    eigvals = np.where(eigvals > 1e-12 * scale, eigvals, 0.0)
    return eigvecs * np.sqrt(eigvals)


def block_factors(config: DgpConfig) -> Dict[str, np.ndarray]:
    factors = {}
    for name, p in config.block_dims().items():
        params: BlockCorrelation = config.correlation[name]
        factors[name] = factor(correlation_matrix(p, params.a, params.b))
    return factors


def _draw_block(config: DgpConfig, factors: Dict[str, np.ndarray], seed: int, block: int,
                n_rows: int) -> Tuple[np.ndarray, ...]:
    rng = block_rng(seed, STREAM_FEATURES, block)
    out = []
    for name in ('u', 'x', 'z'):
        L = factors[name]
        draws = rng.standard_normal((n_rows, L.shape[0])) @ L.T
        if config.tail == Tail.HEAVY:
            dof = config.dof[name]
            mixing = rng.chisquare(dof, size=n_rows) / dof
            # rescale so the covariance, not the shape matrix, equals C
            draws = draws / np.sqrt(mixing)[:, None] * np.sqrt((dof - 2.0) / dof)
        out.append(draws)
    return tuple(out)


def sample_features(config: DgpConfig, n_rows: int, seed: int,
                    n_jobs: int = 1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(U, X, Z) with per-block covariance C; normal or student-t per config.tail"""
    factors = block_factors(config)
    jobs = [(block, stop - start) for block, start, stop in row_blocks(n_rows)]
    if n_jobs == 1 or len(jobs) == 1:
        parts = [_draw_block(config, factors, seed, block, rows) for block, rows in jobs]
    else:
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_draw_block)(config, factors, seed, block, rows) for block, rows in jobs
        )
    if not parts:
        return (np.zeros((0, config.p_u)), np.zeros((0, config.p_x)), np.zeros((0, config.p_z)))
    return tuple(np.vstack([part[k] for part in parts]) for k in range(3))
