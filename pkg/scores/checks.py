"""
Monte-Carlo moment and Neyman-orthogonality checks

The sampler is any object exposing n_levels, p_u, p_x, p_z, sample(n, seed),
true_point() and theta_true(kind) -> (value, stderr); dgp.DgpSampler is the
one shipped with the toolkit.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from errors import InvalidPath

from .functions import NuisancePoint, PointValues, ScoreKind, score_parts_from_arrays

DEFAULT_R_GRID = (-0.1, -0.05, 0.05, 0.1)


class MomentCheck(NamedTuple):
    mean: float
    stderr: float
    passed: bool


class SlotDerivative(BaseModel):
    slot: str
    slope: float
    stderr: float
    passed: bool


@dataclass(frozen=True)
class PerturbationDirection:
    """ϱ - ρ split by slot: δg(level, u, z), δa_k(x, z), δm"""

    delta_g: Callable[[int, np.ndarray, np.ndarray], np.ndarray]
    delta_a: Sequence[Callable[[np.ndarray, np.ndarray], np.ndarray]]
    delta_m: np.ndarray
    name: str = "default"

    def evaluate(self, table, n_levels: int) -> PointValues:
        dg = np.column_stack([np.asarray(self.delta_g(k, table.u, table.z), dtype=float)
                              * np.ones(table.n_rows) for k in range(n_levels)])
        da = np.column_stack([np.asarray(fn(table.x, table.z), dtype=float) for fn in self.delta_a])
        return PointValues(y=np.asarray(table.y), d=np.asarray(table.d), g=dg, a=da,
                           m=np.asarray(self.delta_m, dtype=float))


def _logit_shift(a_fn, weights: np.ndarray):
    """δa = a(1 - a) h with |h| <= 0.5: first-order effect of a logit-space shift"""

    def delta(x, z):
        a = np.asarray(a_fn(x, z), dtype=float)
        h = 0.5 * np.tanh(np.hstack([x, z]) @ weights / math.sqrt(max(len(weights), 1)))
        return a * (1.0 - a) * h

    return delta


def default_direction(point: NuisancePoint, p_x: int, p_z: int, seed: int = 0) -> PerturbationDirection:
    """δg ≡ 1, logit-space δa, δm = 0.1 m"""
    rng = np.random.default_rng(seed)
    delta_a = [_logit_shift(fn, rng.standard_normal(p_x + p_z)) for fn in point.a_fns]
    return PerturbationDirection(
        delta_g=lambda level, u, z: np.ones(len(u)),
        delta_a=delta_a,
        delta_m=0.1 * point.m_vals,
        name="unit-g",
    )


def random_directions(point: NuisancePoint, p_u: int, p_x: int, p_z: int, count: int,
                      seed: int = 0) -> List[PerturbationDirection]:
    """Bounded random directions: δg = c + 0.5 tanh(wᵀ[u, z]), signed δm = ±0.1 m"""
    rng = np.random.default_rng(seed)
    directions = []
    for index in range(count):
        offset = rng.uniform(0.5, 1.0)
        w = rng.standard_normal((point.n_levels, p_u + p_z)) / math.sqrt(max(p_u + p_z, 1))

        def delta_g(level, u, z, w=w, offset=offset):
            return offset + 0.5 * np.tanh(np.hstack([u, z]) @ w[level])

        delta_a = [_logit_shift(fn, rng.standard_normal(p_x + p_z)) for fn in point.a_fns]
        sign = rng.choice([-1.0, 1.0], size=point.n_levels)
        directions.append(PerturbationDirection(delta_g, delta_a, 0.1 * sign * point.m_vals,
                                                name=f"random-{index}"))
    return directions


def _mean_and_stderr(values: np.ndarray):
    n = len(values)
    mean = math.fsum(values) / n
    stderr = float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return mean, stderr


def moment_check(kind: ScoreKind, sampler, point: Optional[NuisancePoint] = None,
                 n_mc: int = 100_000, seed: int = 0, vartheta: Optional[float] = None) -> MomentCheck:
    """Monte-Carlo mean of ψ at (θ_true, ρ_true); passes when |mean| < 3 standard errors.

    The error of the θ_true estimate itself is folded into the tolerance.
    """
    sample = sampler.sample(n_mc, seed)
    point = point or sampler.true_point()
    theta, theta_se = sampler.theta_true(kind)
    if vartheta is None:
        vartheta = theta

    values = point.evaluate(sample.table)
    psi_a, psi_b = score_parts_from_arrays(
        kind, values.y, values.d, values.g[:, kind.i],
        values.a[:, kind.i], values.a[:, kind.j] if kind.conditional else None,
        float(values.m[kind.j]) if kind.conditional else None,
    )
    mean, stderr = _mean_and_stderr(psi_a * vartheta + psi_b)
    slope = math.fsum(psi_a) / len(psi_a)
    tolerance = 3.0 * math.sqrt(stderr ** 2 + (slope * theta_se) ** 2)
    return MomentCheck(mean=mean, stderr=stderr, passed=abs(mean) < tolerance)


def _path_arrays(kind: ScoreKind, base: PointValues, delta: PointValues, slot: str, r: float):
    i, j = kind.i, kind.j
    g_i = base.g[:, i]
    a_i = base.a[:, i]
    a_j = base.a[:, j] if j is not None else None
    m_j = float(base.m[j]) if j is not None else None
    if slot == 'g':
        g_i = g_i + r * delta.g[:, i]
    elif slot == 'a_i':
        a_i = a_i + r * delta.a[:, i]
        if np.any(a_i <= 0) or np.any(a_i > 1):
            raise InvalidPath(f"a_{i} leaves (0, 1] at r = {r}")
    elif slot == 'a_j':
        a_j = a_j + r * delta.a[:, j]
        if np.any(a_j <= 0) or np.any(a_j > 1):
            raise InvalidPath(f"a_{j} leaves (0, 1] at r = {r}")
    elif slot == 'm_j':
        m_j = m_j + r * float(delta.m[j])
        if not 0 < m_j < 1:
            raise InvalidPath(f"m_{j} leaves (0, 1) at r = {r}")
    return g_i, a_i, a_j, m_j


def gateaux_check(kind: ScoreKind, sampler, direction: PerturbationDirection,
                  r_grid: Sequence[float] = DEFAULT_R_GRID, n_mc: int = 100_000, seed: int = 0,
                  point: Optional[NuisancePoint] = None) -> Dict[str, SlotDerivative]:
    """Derivative of E[ψ(θ, ρ + r(ϱ - ρ))] at r = 0, one slot at a time.

    Each row's ψ is fitted by least squares against r on a common sample, and
    the per-row slopes are averaged; passes when |slope| <= 3 standard errors.
    """
    r = np.asarray(r_grid, dtype=float)
    centred = r - r.mean()
    denom = float(centred @ centred)
    if denom == 0.0:
        raise InvalidPath("r_grid needs at least two distinct values")

    sample = sampler.sample(n_mc, seed)
    point = point or sampler.true_point()
    theta, _ = sampler.theta_true(kind)
    base = point.evaluate(sample.table)
    delta = direction.evaluate(sample.table, point.n_levels)

    results: Dict[str, SlotDerivative] = {}
    for slot in kind.slots:
        row_slopes = np.zeros(base.n_rows)
        for weight, step in zip(centred, r):
            g_i, a_i, a_j, m_j = _path_arrays(kind, base, delta, slot, float(step))
            psi_a, psi_b = score_parts_from_arrays(kind, base.y, base.d, g_i, a_i, a_j, m_j)
            row_slopes += weight * (psi_a * theta + psi_b)
        row_slopes /= denom
        slope, stderr = _mean_and_stderr(row_slopes)
        results[slot] = SlotDerivative(slot=slot, slope=slope, stderr=stderr,
                                       passed=abs(slope) <= 3.0 * stderr)
    return results
