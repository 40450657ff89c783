"""
Outcome law: f(D) q(U, Z) with the interaction-based k functions
"""

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from errors import ConfigError

from .config import DgpConfig, KMode

LOG_FLOOR = 1e-12
CHUNK_ROWS = 256


@lru_cache(maxsize=None)
def combination_index(p: int, order: int) -> np.ndarray:
    """Lexicographic index array of all `order`-subsets of range(p)"""
    if order > p:
        return np.zeros((0, order), dtype=np.int64)
    return np.array(list(combinations(range(p), order)), dtype=np.int64).reshape(comb(p, order), order)


@lru_cache(maxsize=None)
def _membership_index(p: int, order: int):
    return combination_index(p, order).ravel()


def interaction_vector(v: Sequence[float], order: int) -> np.ndarray:
    """All products of `order` distinct components of v, in lexicographic order"""
    if not 2 <= order <= 4:
        raise ConfigError(f"interaction order must be between 2 and 4, got {order}")
    v = np.asarray(v, dtype=float)
    index = combination_index(len(v), order)
    return np.prod(v[index], axis=1)


def membership_weights(c: np.ndarray, p: int, order: int) -> np.ndarray:
    """M[k] = sum of c over the combinations containing component k"""
    weights = np.zeros(p)
    np.add.at(weights, _membership_index(p, order), np.repeat(np.asarray(c, dtype=float), order))
    return weights


def _safe_log_abs(values: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(np.abs(values), LOG_FLOOR))


def k_values(V: np.ndarray, c_vectors: Sequence[Sequence[float]], mode: KMode) -> np.ndarray:
    """k(v) for every row of V, computed in row chunks"""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    mode = KMode(mode)
    c1 = np.asarray(c_vectors[0], dtype=float)
    if mode == KMode.LINEAR:
        return V @ c1

    n, p = V.shape
    higher = [(order, np.asarray(c_vectors[order - 1], dtype=float)) for order in range(2, 5)]
    log_weights = c1 + sum(membership_weights(c, p, order) for order, c in higher)
    logs = _safe_log_abs(V) @ log_weights

    linear = V @ c1
    for start in range(0, n, CHUNK_ROWS):
        chunk = V[start:start + CHUNK_ROWS]
        for order, c in higher:
            index = combination_index(p, order)
            if index.shape[0]:
                linear[start:start + CHUNK_ROWS] += np.prod(chunk[:, index], axis=2) @ c
    return _safe_log_abs(linear) + logs


def k_of(v: Sequence[float], c_vectors: Sequence[Sequence[float]], mode: KMode) -> float:
    return float(k_values(np.reshape(np.asarray(v, dtype=float), (1, -1)), c_vectors, mode)[0])


def q_values(U: np.ndarray, Z: np.ndarray, config: DgpConfig) -> np.ndarray:
    """{exp(|a0ᵀZ|) + e1 log(e2 + k(Z)^2 + |k(U)|^τ)}^r, both log argument and base floored"""
    k_z = k_values(Z, config.c_z, config.k_mode)
    k_u = k_values(U, config.c_u, config.k_mode)
    inner = np.maximum(config.e2 + k_z ** 2 + np.abs(k_u) ** config.tau, LOG_FLOOR)
    base = np.exp(np.abs(Z @ np.asarray(config.a0))) + config.e1 * np.log(inner)
    return np.maximum(base, LOG_FLOOR) ** config.r_exp


def q_of(u_row: Sequence[float], z_row: Sequence[float], config: DgpConfig) -> float:
    return float(q_values(np.reshape(u_row, (1, -1)), np.reshape(z_row, (1, -1)), config)[0])


def f_of_d(d, config: DgpConfig):
    """α + (1 - α)[β d^m + (1 - β) exp(d^n)]"""
    d = np.asarray(d, dtype=float)
    with np.errstate(invalid='ignore'):
        d_n = np.power(d, config.power_n)
        d_m = np.power(d, config.power_m)
    if np.any(~np.isfinite(d_n)) or np.any(~np.isfinite(d_m)):
        raise ConfigError(f"treatment level(s) {d} not admissible for powers m={config.power_m}, n={config.power_n}")
    if np.any(d_n > 700.0):
        raise ConfigError(f"d^n exceeds 700 for level(s) {d[d_n > 700.0] if d.ndim else d}; exp(d^n) would overflow")
    value = config.alpha + (1.0 - config.alpha) * (config.beta * d_m + (1.0 - config.beta) * np.exp(d_n))
    return float(value) if value.ndim == 0 else value
