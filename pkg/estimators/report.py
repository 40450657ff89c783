"""
EstimateReport - θ, ATE and ATTE for every estimator family on one evaluation set
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field

from . import theta as est
from .bundle import NuisanceBundle, NuisanceValues, nuisance_values

FAMILIES = ("IoC", "IwC", "DRE")


class FamilyEstimates(BaseModel):
    """θ^i, θ^{i|j}, ATE and ATTE; None marks an entry whose level j has no rows"""

    theta_i: List[float]
    theta_i_given_j: List[List[Optional[float]]]
    ate: List[List[float]]
    atte: List[List[List[Optional[float]]]]

    @classmethod
    def compose(cls, theta_i: Sequence[float],
                theta_i_given_j: Sequence[Sequence[Optional[float]]]) -> "FamilyEstimates":
        n = len(theta_i)
        theta_i = [float(v) for v in theta_i]
        ate = [[0.0 if i == k else theta_i[i] - theta_i[k] for k in range(n)] for i in range(n)]
        atte = [[[None] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for k in range(n):
                for j in range(n):
                    a, b = theta_i_given_j[i][j], theta_i_given_j[k][j]
                    if a is not None and b is not None:
                        atte[i][k][j] = 0.0 if i == k else float(a) - float(b)
        conditional = [[None if v is None else float(v) for v in row] for row in theta_i_given_j]
        return cls(theta_i=theta_i, theta_i_given_j=conditional, ate=ate, atte=atte)

    def ate_array(self) -> np.ndarray:
        return np.asarray(self.ate, dtype=float)

    def atte_array(self) -> np.ndarray:
        """n x n x n array indexed [i][k][j]; missing entries are NaN"""
        return np.array([[[np.nan if v is None else v for v in col] for col in row] for row in self.atte])

    def conditional_array(self) -> np.ndarray:
        return np.array([[np.nan if v is None else v for v in row] for row in self.theta_i_given_j])


class EstimateReport(BaseModel):
    levels: List[float]
    n_eval: int
    level_counts: List[int]
    families: Dict[str, FamilyEstimates]
    truth: Optional[FamilyEstimates] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    def family(self, name: str) -> FamilyEstimates:
        try:
            return self.families[name]
        except KeyError:
            raise KeyError(f"report has no estimator family '{name}' (have {sorted(self.families)})") from None

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            f.write(self.model_dump_json(indent=2))
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "EstimateReport":
        with open(path, 'r') as f:
            return cls.model_validate(json.load(f))


def _family_estimates(values: NuisanceValues, family: str, counts: List[int],
                      m_vals: Optional[np.ndarray]) -> FamilyEstimates:
    n = values.n_levels
    if family == "IoC":
        theta_i = [est.ioc(values, i) for i in range(n)]
    else:
        # the doubly-robust score for θ^i coincides with the IwC score
        theta_i = [est.iwc(values, i) for i in range(n)]

    conditional: List[List[Optional[float]]] = [[None] * n for _ in range(n)]
    for j in range(n):
        if counts[j] == 0:
            continue
        for i in range(n):
            if i == j:
                conditional[i][j] = est.factual_mean(values, j)
            elif family == "IoC":
                conditional[i][j] = est.ioc_conditional(values, i, j)
            elif family == "IwC":
                conditional[i][j] = est.iwc_conditional(values, i, j)
            else:
                m_j = None if m_vals is None else float(m_vals[j])
                conditional[i][j] = est.dre_conditional(values, i, j, m_j)
    return FamilyEstimates.compose(theta_i, conditional)


def full_report(table, bundle: NuisanceBundle, levels: Optional[Sequence[float]] = None,
                truth: Optional[FamilyEstimates] = None,
                families: Sequence[str] = FAMILIES) -> EstimateReport:
    """All θ̂, ATE and ATTE entries for the requested families.

    Diagonal entries θ^{j|j} are the factual mean of y over the level-j rows.
    Levels with no evaluation rows leave their conditional entries as None.
    """
    values = nuisance_values(table, bundle)
    n = values.n_levels
    counts = [values.count(j) for j in range(n)]
    missing = [j for j in range(n) if counts[j] == 0]

    estimates = {family: _family_estimates(values, family, counts, bundle.m_vals) for family in families}
    diagnostics: Dict[str, Any] = dict(est.ipw_diagnostics(values))
    if missing:
        diagnostics['missing_levels'] = missing

    return EstimateReport(
        levels=[float(v) for v in (levels if levels is not None else range(n))],
        n_eval=values.n_rows,
        level_counts=counts,
        families=estimates,
        truth=truth,
        diagnostics=diagnostics,
    )
