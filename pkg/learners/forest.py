"""
Random forest of CART regression trees

Trees are stored as flat arrays (feature, threshold, left, right, value);
a node with feature == -1 is a leaf. Rows with x[feature] <= threshold go left.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .base import FittedOutcomeModel


@dataclass
class TreeArrays:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            active = self.feature[node] >= 0
            if not active.any():
                break
            idx = rows[active]
            current = node[active]
            go_left = X[idx, self.feature[current]] <= self.threshold[current]
            node[idx] = np.where(go_left, self.left[current], self.right[current])
        return self.value[node]

    def to_dict(self) -> dict:
        return {
            'feature': self.feature.tolist(),
            'threshold': self.threshold.tolist(),
            'left': self.left.tolist(),
            'right': self.right.tolist(),
            'value': self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TreeArrays":
        return cls(
            feature=np.asarray(data['feature'], dtype=np.int64),
            threshold=np.asarray(data['threshold'], dtype=float),
            left=np.asarray(data['left'], dtype=np.int64),
            right=np.asarray(data['right'], dtype=np.int64),
            value=np.asarray(data['value'], dtype=float),
        )


def best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray,
               min_leaf: int) -> Optional[Tuple[int, float]]:
    """Variance-reduction split over the candidate features.

    Candidates are scanned in ascending feature order and ascending threshold;
    only a strictly better score replaces the incumbent.
    """
    n = len(y)
    total = float(y.sum())
    parent = total * total / n
    best_score = parent + 1e-12 * (abs(parent) + 1.0)
    best = None
    n_left = np.arange(1, n)
    for f in features:
        order = np.argsort(X[:, f], kind='stable')
        xs = X[order, f]
        left_sum = np.cumsum(y[order])[:-1]
        valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        score = np.full(n - 1, -np.inf)
        score[valid] = (left_sum[valid] ** 2 / n_left[valid]
                        + (total - left_sum[valid]) ** 2 / (n - n_left[valid]))
        k = int(np.argmax(score))
        if score[k] > best_score:
            threshold = 0.5 * (xs[k] + xs[k + 1])
            if threshold >= xs[k + 1]:
                threshold = xs[k]
            best_score = score[k]
            best = (int(f), float(threshold))
    return best


def grow_tree(X: np.ndarray, y: np.ndarray, rng: np.random.Generator, max_depth: int,
              min_leaf: int, max_features: int) -> TreeArrays:
    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    p = X.shape[1]
    stack = [(new_node(), np.arange(len(y)), 0)]
    while stack:
        node, rows, depth = stack.pop()
        value[node] = float(np.mean(y[rows]))
        if depth >= max_depth or rows.size < 2 * min_leaf or p == 0:
            continue
        candidates = np.sort(rng.choice(p, size=min(max_features, p), replace=False))
        split = best_split(X[rows], y[rows], candidates, min_leaf)
        if split is None:
            continue
        f, t = split
        mask = X[rows, f] <= t
        lo, hi = new_node(), new_node()
        feature[node], threshold[node], left[node], right[node] = f, t, lo, hi
        stack.append((hi, rows[~mask], depth + 1))
        stack.append((lo, rows[mask], depth + 1))

    return TreeArrays(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=float),
    )


def grow_forest(X: np.ndarray, y: np.ndarray, seed: int, n_trees: int, max_depth: int,
                min_leaf: int, feature_subsample: Optional[int] = None,
                bootstrap: bool = True) -> List[TreeArrays]:
    rng = np.random.default_rng(seed)
    n, p = X.shape
    max_features = feature_subsample or max(1, int(np.sqrt(p)))
    trees = []
    for _ in range(n_trees):
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(grow_tree(X[rows], y[rows], rng, max_depth, min_leaf, max_features))
    return trees


def forest_predict(trees: List[TreeArrays], X: np.ndarray) -> np.ndarray:
    return np.mean(np.stack([tree.apply(X) for tree in trees]), axis=0)


class ForestOutcomeModel(FittedOutcomeModel):
    family = "RANDOM_FOREST"

    def __init__(self, forests: List[List[TreeArrays]], per_level: bool,
                 n_levels: int, p_u: int, p_z: int):
        super().__init__(n_levels, p_u, p_z)
        self.forests = forests
        self.per_level = bool(per_level)

    def _predict_level(self, level, features):
        if self.per_level:
            return forest_predict(self.forests[level], features)
        design = np.column_stack([features, np.full(len(features), float(level))])
        return forest_predict(self.forests[0], design)

    def to_dict(self) -> dict:
        return {
            'family': self.family,
            'per_level': self.per_level,
            'n_levels': self.n_levels,
            'p_u': self.p_u,
            'p_z': self.p_z,
            'forests': [[tree.to_dict() for tree in forest] for forest in self.forests],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForestOutcomeModel":
        forests = [[TreeArrays.from_dict(t) for t in forest] for forest in data['forests']]
        return cls(forests, data['per_level'], data['n_levels'], data['p_u'], data['p_z'])
