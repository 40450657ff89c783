"""
Fitted nuisances and the prediction matrices the estimators average over
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from errors import ConfigError, DomainError


@dataclass(frozen=True)
class NuisanceBundle:
    """ĝ, P̂ and the evaluation rows; m_vals overrides the empirical N_j / N"""

    g_hat: object
    p_hat: object
    eval_rows: np.ndarray
    m_vals: Optional[Sequence[float]] = None

    def __post_init__(self):
        rows = np.asarray(self.eval_rows, dtype=np.int64)
        if rows.size == 0:
            raise ConfigError("eval_rows must be non-empty")
        object.__setattr__(self, 'eval_rows', rows)
        if self.g_hat.n_levels != self.p_hat.n_levels:
            raise ConfigError(
                f"outcome model has {self.g_hat.n_levels} levels, propensity model {self.p_hat.n_levels}"
            )
        if self.m_vals is not None:
            m_vals = np.asarray(self.m_vals, dtype=float)
            if m_vals.shape != (self.g_hat.n_levels,) or np.any(m_vals <= 0):
                raise DomainError(f"m_vals must be {self.g_hat.n_levels} positive values")
            object.__setattr__(self, 'm_vals', m_vals)

    @property
    def n_levels(self) -> int:
        return self.g_hat.n_levels


@dataclass(frozen=True)
class NuisanceValues:
    """y, d, Ĝ (N x n) and clipped P̂ (N x n) on the evaluation rows"""

    y: np.ndarray
    d: np.ndarray
    g: np.ndarray
    p: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.y)

    @property
    def n_levels(self) -> int:
        return self.g.shape[1]

    def count(self, level: int) -> int:
        return int(np.count_nonzero(self.d == level))


def nuisance_values(table, bundle: NuisanceBundle) -> NuisanceValues:
    rows = bundle.eval_rows
    g = bundle.g_hat.predict_matrix(table.u[rows], table.z[rows])
    p = bundle.p_hat.predict_proba(table.x[rows], table.z[rows])
    return NuisanceValues(y=np.asarray(table.y[rows]), d=np.asarray(table.d[rows]), g=g, p=p)
