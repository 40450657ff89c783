"""
Score functions ψ(W, ϑ, ϱ) for the IoC, IwC and DRE constructions

Every score is affine in ϑ and is returned as ψ = psi_a * ϑ + psi_b,
evaluated row-wise on a table.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigError, DegenerateSlope, DomainError


class ScoreFamily(str, Enum):
    IOC = "IOC"
    IWC = "IWC"
    DRE = "DRE"


@dataclass(frozen=True)
class ScoreKind:
    """Family plus estimand: UNCONDITIONAL(i) when j is None, else CONDITIONAL(i, j)"""

    family: ScoreFamily
    i: int
    j: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'family', ScoreFamily(self.family))
        if self.j is not None and self.i == self.j:
            raise ConfigError(f"conditional score needs i != j, got i = j = {self.i}")

    @property
    def conditional(self) -> bool:
        return self.j is not None

    @property
    def estimand(self) -> str:
        return "CONDITIONAL" if self.conditional else "UNCONDITIONAL"

    @property
    def slots(self) -> Tuple[str, ...]:
        """Nuisance slots the score depends on"""
        if self.family == ScoreFamily.IOC:
            return ('g', 'm_j') if self.conditional else ('g',)
        return ('g', 'a_i', 'a_j', 'm_j') if self.conditional else ('g', 'a_i')

    @property
    def label(self) -> str:
        if self.conditional:
            return f"{self.family.value} CONDITIONAL({self.i}|{self.j})"
        return f"{self.family.value} UNCONDITIONAL({self.i})"


@dataclass(frozen=True)
class NuisancePoint:
    """ϱ = (𝑔, a_1..a_n, m_1..m_n)"""

    g_fn: Callable[[int, np.ndarray, np.ndarray], np.ndarray]
    a_fns: Sequence[Callable[[np.ndarray, np.ndarray], np.ndarray]]
    m_vals: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'm_vals', np.asarray(self.m_vals, dtype=float))

    @property
    def n_levels(self) -> int:
        return len(self.a_fns)

    def evaluate(self, table) -> "PointValues":
        g = np.column_stack([np.asarray(self.g_fn(k, table.u, table.z), dtype=float)
                             for k in range(self.n_levels)])
        a = np.column_stack([np.asarray(fn(table.x, table.z), dtype=float) for fn in self.a_fns])
        return PointValues(y=np.asarray(table.y), d=np.asarray(table.d), g=g, a=a, m=self.m_vals.copy())

    @classmethod
    def from_models(cls, g_model, p_model, m_vals) -> "NuisancePoint":
        """Plug-in point from fitted learners (P̂ clipped)"""
        a_fns = [
            (lambda x, z, k=k: p_model.predict_proba(x, z)[:, k])
            for k in range(p_model.n_levels)
        ]
        return cls(g_fn=g_model.predict, a_fns=a_fns, m_vals=np.asarray(m_vals, dtype=float))


@dataclass
class PointValues:
    y: np.ndarray
    d: np.ndarray
    g: np.ndarray
    a: np.ndarray
    m: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.y)


def empirical_marginals(table, n_levels: int) -> np.ndarray:
    """m̂_j = N_j / N"""
    return np.bincount(table.d, minlength=n_levels)[:n_levels] / table.n_rows


def _check_domain(kind: ScoreKind, a_i, a_j, m_j):
    if 'a_i' in kind.slots and np.any(a_i <= 0):
        raise DomainError(f"a_{kind.i} must be positive")
    if 'a_j' in kind.slots and np.any(a_j <= 0):
        raise DomainError(f"a_{kind.j} must be positive")
    if 'm_j' in kind.slots and m_j <= 0:
        raise DomainError(f"m_{kind.j} must be positive, got {m_j}")


def score_parts_from_arrays(kind: ScoreKind, y: np.ndarray, d: np.ndarray, g_i: np.ndarray,
                            a_i: Optional[np.ndarray] = None, a_j: Optional[np.ndarray] = None,
                            m_j: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    _check_domain(kind, a_i, a_j, m_j)
    on_i = d == kind.i
    ones = np.ones(len(y))

    if not kind.conditional:
        if kind.family == ScoreFamily.IOC:
            return ones, -g_i
        correction = np.zeros(len(y))
        correction[on_i] = (y[on_i] - g_i[on_i]) / a_i[on_i]
        return ones, -g_i - correction

    on_j = (d == kind.j).astype(float)
    if kind.family == ScoreFamily.IOC:
        return on_j / m_j, -on_j * g_i / m_j

    weighted = np.zeros(len(y))
    weighted[on_i] = a_j[on_i] / a_i[on_i] * (y[on_i] - g_i[on_i])
    if kind.family == ScoreFamily.IWC:
        return on_j / m_j, -(on_j * g_i + weighted) / m_j
    return ones, -on_j * g_i / m_j - weighted / m_j


def score_parts(kind: ScoreKind, values: PointValues) -> Tuple[np.ndarray, np.ndarray]:
    j = kind.j
    return score_parts_from_arrays(
        kind, values.y, values.d, values.g[:, kind.i],
        a_i=values.a[:, kind.i],
        a_j=values.a[:, j] if j is not None else None,
        m_j=float(values.m[j]) if j is not None else None,
    )


def eval_score(kind: ScoreKind, row, vartheta: float, point: NuisancePoint) -> float:
    """ψ for one record row = (y, d, u, x, z)"""
    y, d, u, x, z = row
    u = np.reshape(np.asarray(u, dtype=float), (1, -1))
    x = np.reshape(np.asarray(x, dtype=float), (1, -1))
    z = np.reshape(np.asarray(z, dtype=float), (1, -1))
    g_i = np.asarray(point.g_fn(kind.i, u, z), dtype=float).reshape(-1)
    a_i = np.asarray(point.a_fns[kind.i](x, z), dtype=float).reshape(-1)
    a_j = m_j = None
    if kind.j is not None:
        a_j = np.asarray(point.a_fns[kind.j](x, z), dtype=float).reshape(-1)
        m_j = float(point.m_vals[kind.j])
    psi_a, psi_b = score_parts_from_arrays(
        kind, np.array([float(y)]), np.array([int(d)]), g_i, a_i, a_j, m_j
    )
    return float(psi_a[0] * vartheta + psi_b[0])


def score_values(kind: ScoreKind, table, vartheta: float, point: NuisancePoint) -> np.ndarray:
    psi_a, psi_b = score_parts(kind, point.evaluate(table))
    return psi_a * vartheta + psi_b


def solve_theta(kind: ScoreKind, table, point: NuisancePoint) -> float:
    """ϑ with zero empirical mean score"""
    if kind.conditional and not np.any(table.d == kind.j):
        raise DegenerateSlope(f"{kind.label}: no rows at level {kind.j}")
    psi_a, psi_b = score_parts(kind, point.evaluate(table))
    slope = math.fsum(psi_a)
    if slope == 0.0 or not math.isfinite(slope):
        raise DegenerateSlope(f"{kind.label}: mean score does not depend on ϑ")
    return -math.fsum(psi_b) / slope
