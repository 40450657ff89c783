"""
ExperimentConfig - one benchmark run as a validated, hashable JSON document
"""

import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from dgp import DgpConfig, Tail
from errors import ConfigError
from estimators import FAMILIES
from learners import OutcomeFamily, OutcomeModelSpec, PropensitySettings

SCHEMA_VERSION = 1

# fields that change how a run executes but never what it produces
_EXECUTION_ONLY = {'output_dir', 'n_jobs'}


class KnobCell(BaseModel):
    """One (α, β, tail) cell of a benchmark grid"""

    alpha: float = Field(ge=0.0, le=1.0)
    beta: float = Field(ge=0.0, le=1.0)
    tail: Tail = Tail.LIGHT

    @property
    def slug(self) -> str:
        return f"a{self.alpha:g}_b{self.beta:g}_{self.tail.value}"


class ExperimentConfig(BaseModel):
    schema_version: int = SCHEMA_VERSION
    mode: Literal['simulated', 'semi_synthetic'] = 'simulated'
    dgp: Optional[DgpConfig] = None
    features_csv: Optional[str] = None

    n_rows: int = Field(10_000, ge=100)
    repetitions: int = Field(1, ge=1)
    seed: int = Field(ge=0)
    split_fraction: float = Field(0.7, gt=0.0, lt=1.0)
    eval_on: Literal['test', 'all'] = 'test'

    regressors: List[OutcomeModelSpec] = Field(
        default_factory=lambda: [OutcomeModelSpec(family=OutcomeFamily.OLS)]
    )
    propensity: PropensitySettings = Field(default_factory=PropensitySettings)
    families: List[str] = Field(default_factory=lambda: list(FAMILIES))
    grid: List[KnobCell] = Field(default_factory=list)

    # score checks
    n_mc: int = Field(100_000, ge=100)
    n_truth: int = Field(1_000_000, ge=1_000)
    check_levels: Tuple[int, int] = (1, 2)
    n_directions: int = Field(4, ge=0)

    output_dir: str = 'runs'
    n_jobs: int = 1

    @field_validator('schema_version')
    @classmethod
    def _known_schema(cls, version: int) -> int:
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version} (this build reads {SCHEMA_VERSION})")
        return version

    @field_validator('families')
    @classmethod
    def _known_families(cls, families: List[str]) -> List[str]:
        unknown = sorted(set(families) - set(FAMILIES))
        if unknown or not families:
            raise ValueError(f"families must be a non-empty subset of {list(FAMILIES)}, got {families}")
        return [family for family in FAMILIES if family in families]

    @field_validator('regressors')
    @classmethod
    def _distinct_labels(cls, regressors: List[OutcomeModelSpec]) -> List[OutcomeModelSpec]:
        labels = [spec.label for spec in regressors]
        if not regressors or len(set(labels)) != len(labels):
            raise ValueError(f"regressor labels must be non-empty and distinct, got {labels}")
        return regressors

    @model_validator(mode='after')
    def _check_mode(self) -> "ExperimentConfig":
        if self.mode == 'semi_synthetic' and not self.features_csv:
            raise ValueError("semi_synthetic mode needs features_csv")
        i, j = self.check_levels
        n_levels = self.resolved_dgp().n_levels
        if i == j or not (0 <= i < n_levels and 0 <= j < n_levels):
            raise ValueError(f"check_levels {self.check_levels} must be two distinct levels below {n_levels}")
        return self

    def resolved_dgp(self) -> DgpConfig:
        if self.dgp is not None:
            return self.dgp
        if self.mode == 'semi_synthetic':
            return DgpConfig.semi_synthetic()
        return DgpConfig.simulated()

    def cells(self) -> List[Tuple[Optional[KnobCell], DgpConfig]]:
        """(cell, DGP) pairs; a run without a grid has the single configured DGP"""
        base = self.resolved_dgp()
        if not self.grid:
            return [(None, base)]
        return [(cell, base.with_knobs(cell.alpha, cell.beta, cell.tail)) for cell in self.grid]

    # --- identity -----------------------------------------------------------

    def canonical_json(self) -> str:
        payload = json.loads(self.model_dump_json(exclude=_EXECUTION_ONLY))
        payload['dgp'] = json.loads(self.resolved_dgp().model_dump_json())
        return json.dumps(payload, sort_keys=True, separators=(',', ':'))

    def run_id(self) -> str:
        return hashlib.sha256(self.canonical_json().encode('utf-8')).hexdigest()[:12]

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2))
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            return cls.model_validate_json(Path(path).read_text())
        except (OSError, ValidationError) as exc:
            raise ConfigError(f"invalid experiment config {path}: {exc}") from exc

    @classmethod
    def build(cls, **fields) -> "ExperimentConfig":
        try:
            return cls(**fields)
        except ValidationError as exc:
            raise ConfigError(f"invalid experiment config: {exc}") from exc


def repetition_seed(seed: int, repetition: int) -> int:
    """Sub-seed of repetition m: first word of SeedSequence(seed, spawn_key=(m,))"""
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(repetition,)).generate_state(1)[0])
