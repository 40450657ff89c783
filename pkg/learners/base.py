"""
Learner interfaces and the outcome model specification
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from errors import DimensionMismatch


class OutcomeFamily(str, Enum):
    OLS = "OLS"
    RIDGE = "RIDGE"
    LASSO = "LASSO"
    RANDOM_FOREST = "RANDOM_FOREST"
    MLP = "MLP"

    @property
    def is_linear(self) -> bool:
        return self in (OutcomeFamily.OLS, OutcomeFamily.RIDGE, OutcomeFamily.LASSO)


class OutcomeModelSpec(BaseModel):
    """Choice of outcome regressor and its fixed hyperparameters"""

    family: OutcomeFamily
    name: Optional[str] = None
    per_level: Optional[bool] = None

    # RIDGE / LASSO
    penalty: float = Field(1.0, ge=0.0)
    tol: float = Field(1e-10, gt=0.0)
    max_iter: int = Field(100_000, ge=1)

    # RANDOM_FOREST
    n_trees: int = Field(100, ge=1)
    max_depth: int = Field(10, ge=1)
    min_leaf: int = Field(5, ge=1)
    feature_subsample: Optional[int] = Field(None, ge=1)
    bootstrap: bool = True

    # MLP
    hidden: List[int] = Field(default_factory=lambda: [64, 64, 64])
    learning_rate: float = Field(1e-3, gt=0.0)
    epochs: int = Field(200, ge=1)
    batch_size: int = Field(256, ge=1)

    @field_validator('hidden')
    @classmethod
    def _positive_widths(cls, widths: List[int]) -> List[int]:
        if not widths or any(width < 1 for width in widths):
            raise ValueError(f"hidden layer widths must be >= 1, got {widths}")
        return widths

    @property
    def label(self) -> str:
        return self.name or self.family.value

    def resolved_per_level(self) -> bool:
        if self.per_level is not None:
            return self.per_level
        return self.family.is_linear


class FittedOutcomeModel(ABC):
    """ĝ(d, u, z): predicts the outcome under every treatment level"""

    family: str = "ABSTRACT"

    def __init__(self, n_levels: int, p_u: int, p_z: int):
        self.n_levels = int(n_levels)
        self.p_u = int(p_u)
        self.p_z = int(p_z)

    def _features(self, u: np.ndarray, z: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if u.shape[1] != self.p_u:
            raise DimensionMismatch("outcome features u", self.p_u, u.shape[1])
        if z.shape[1] != self.p_z:
            raise DimensionMismatch("confounders z", self.p_z, z.shape[1])
        return np.hstack([u, z])

    @abstractmethod
    def _predict_level(self, level: int, features: np.ndarray) -> np.ndarray:
        ...

    def predict(self, level: int, u: np.ndarray, z: np.ndarray) -> np.ndarray:
        if not 0 <= level < self.n_levels:
            raise IndexError(f"level {level} out of range for {self.n_levels} levels")
        return self._predict_level(level, self._features(u, z))

    def predict_matrix(self, u: np.ndarray, z: np.ndarray) -> np.ndarray:
        """N x n matrix of predictions, one column per level"""
        features = self._features(u, z)
        return np.column_stack([self._predict_level(i, features) for i in range(self.n_levels)])


class CallableOutcomeModel(FittedOutcomeModel):
    """Wraps a vectorised fn(level, u, z); used for oracles and fixtures"""

    family = "CALLABLE"

    def __init__(self, fn: Callable[[int, np.ndarray, np.ndarray], np.ndarray],
                 n_levels: int, p_u: int, p_z: int):
        super().__init__(n_levels, p_u, p_z)
        self.fn = fn

    def _predict_level(self, level, features):
        u, z = features[:, :self.p_u], features[:, self.p_u:]
        return np.asarray(self.fn(level, u, z), dtype=float).reshape(-1)


def predict_outcome(model: FittedOutcomeModel, level: int, u_row, z_row) -> float:
    """ĝ(d^level, u, z) for a single record"""
    return float(model.predict(level, np.reshape(u_row, (1, -1)), np.reshape(z_row, (1, -1)))[0])
