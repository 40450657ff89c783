"""
ExperimentSeries - the M repetitions one metric value is computed over
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from errors import ConfigError
from estimators import EstimateReport, FamilyEstimates


@dataclass(frozen=True)
class ExperimentSeries:
    """Reports of M repetitions sharing one configuration and N; each carries its truth"""

    reports: Tuple[EstimateReport, ...]
    fingerprint: str = ""
    n_rows: int = 0
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        reports = tuple(self.reports)
        object.__setattr__(self, 'reports', reports)
        if not reports:
            raise ConfigError("an experiment series needs at least one repetition")
        missing = [m for m, report in enumerate(reports) if report.truth is None]
        if missing:
            raise ConfigError(f"repetitions {missing} carry no ground truth")
        levels = {len(report.levels) for report in reports}
        if len(levels) != 1:
            raise ConfigError(f"repetitions disagree on the number of levels: {sorted(levels)}")

    @classmethod
    def from_reports(cls, reports: Sequence[EstimateReport], fingerprint: str = "",
                     n_rows: int = 0) -> "ExperimentSeries":
        return cls(reports=tuple(reports), fingerprint=fingerprint, n_rows=n_rows)

    @property
    def repetitions(self) -> int:
        return len(self.reports)

    @property
    def n_levels(self) -> int:
        return len(self.reports[0].levels)

    def estimates(self, family: str) -> List[FamilyEstimates]:
        return [report.family(family) for report in self.reports]

    def truths(self) -> List[FamilyEstimates]:
        return [report.truth for report in self.reports]

    def stacked(self, family: str, estimand: str) -> Tuple[np.ndarray, np.ndarray]:
        """(estimates, truths) as M x K arrays over the estimand's K entries.

        "unconditional" stacks θ^i (K = n); "conditional" stacks the n(n-1)
        off-diagonal θ^{i|j} in row-major (i, j) order, NaN where missing.
        """
        if estimand == "unconditional":
            pick = lambda fam: np.asarray(fam.theta_i, dtype=float)
        elif estimand == "conditional":
            n = self.n_levels
            off = ~np.eye(n, dtype=bool)
            pick = lambda fam: fam.conditional_array()[off]
        else:
            raise ConfigError(f"estimand must be 'unconditional' or 'conditional', got '{estimand}'")
        estimates = np.vstack([pick(fam) for fam in self.estimates(family)])
        truths = np.vstack([pick(fam) for fam in self.truths()])
        return estimates, truths
