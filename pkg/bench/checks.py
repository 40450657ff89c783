"""
Score-condition verdicts for every family and estimand on a synthetic population

Each kind is checked along the default direction plus `n_directions`
random ones; `slots` holds the default-direction derivatives and
`worst_slots` the derivative furthest from zero (in standard errors) over
the whole suite.
"""

import math
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from config import get_settings
from dgp import DgpSampler
from run_tracker import RunTracker
from scores import (
    ScoreFamily,
    ScoreKind,
    SlotDerivative,
    default_direction,
    gateaux_check,
    moment_check,
    random_directions,
)

from .persistence import run_directory, write_checks, write_config
from .settings import ExperimentConfig


class ScoreVerdict(BaseModel):
    family: str
    estimand: str
    label: str
    theta_true: float
    moment_mean: float
    moment_stderr: float
    moment_passed: bool
    slots: Dict[str, SlotDerivative]
    worst_slots: Dict[str, SlotDerivative] = Field(default_factory=dict)
    directions: List[str] = Field(default_factory=list)

    @property
    def orthogonal(self) -> bool:
        slots = self.worst_slots or self.slots
        return all(slot.passed for slot in slots.values())


class ScoreCheckReport(BaseModel):
    run_id: str
    levels: List[int]
    n_mc: int
    n_truth: int
    verdicts: List[ScoreVerdict]

    def verdict(self, family: str, estimand: str) -> ScoreVerdict:
        for verdict in self.verdicts:
            if verdict.family == family and verdict.estimand == estimand:
                return verdict
        raise KeyError(f"no verdict for {family} {estimand}")


def score_kinds(i: int, j: int) -> List[ScoreKind]:
    kinds = []
    for family in ScoreFamily:
        kinds.append(ScoreKind(family, i))
        kinds.append(ScoreKind(family, i, j))
    return kinds


def _distance(derivative: SlotDerivative) -> float:
    if derivative.stderr > 0:
        return abs(derivative.slope) / derivative.stderr
    return math.inf if derivative.slope != 0 else 0.0


def worst_slots(suite: List[Dict[str, SlotDerivative]]) -> Dict[str, SlotDerivative]:
    """Per slot, the derivative with the largest |slope| / stderr across directions"""
    return {slot: max((slots[slot] for slots in suite), key=_distance) for slot in suite[0]}


def check_all(sampler, i: int, j: int, n_mc: int, seed: int, n_directions: int = 0) -> List[ScoreVerdict]:
    point = sampler.true_point()
    directions = [default_direction(point, sampler.p_x, sampler.p_z, seed=seed)]
    if n_directions:
        directions += random_directions(point, sampler.p_u, sampler.p_x, sampler.p_z, n_directions,
                                        seed=seed + 1)
    verdicts = []
    for kind in score_kinds(i, j):
        moment = moment_check(kind, sampler, point=point, n_mc=n_mc, seed=seed)
        suite = [gateaux_check(kind, sampler, direction, n_mc=n_mc, seed=seed, point=point)
                 for direction in directions]
        verdicts.append(ScoreVerdict(
            family=kind.family.value,
            estimand=kind.estimand,
            label=kind.label,
            theta_true=sampler.theta_true(kind)[0],
            moment_mean=moment.mean,
            moment_stderr=moment.stderr,
            moment_passed=moment.passed,
            slots=suite[0],
            worst_slots=worst_slots(suite),
            directions=[direction.name for direction in directions],
        ))
    return verdicts


def run_score_checks(config: ExperimentConfig, sampler: Optional[DgpSampler] = None,
                     tracker: Optional[RunTracker] = None) -> ScoreCheckReport:
    """Moment and slot-wise orthogonality verdicts, written to checks.json"""
    settings = get_settings()
    run_id = config.run_id()
    directory = run_directory(config.output_dir, run_id)
    write_config(directory, config)
    tracker = tracker or RunTracker(settings.run_log)
    tracker.start_run('check-scores', run_id)

    sampler = sampler or DgpSampler(config.resolved_dgp(), reference_seed=config.seed,
                                    n_truth=config.n_truth, truth_seed=config.seed + 1)
    i, j = config.check_levels
    print(f"🚀 Score checks at levels i={i}, j={j} with {config.n_mc} Monte-Carlo rows "
          f"and {config.n_directions + 1} direction(s)")
    verdicts = check_all(sampler, i, j, config.n_mc, config.seed, n_directions=config.n_directions)
    for verdict in verdicts:
        failed = [slot for slot, derivative in verdict.worst_slots.items() if not derivative.passed]
        mark = "✅" if verdict.moment_passed and not failed else "⚠️"
        print(f"   {mark} {verdict.label}: moment {'pass' if verdict.moment_passed else 'FAIL'}, "
              f"non-orthogonal slots {failed or 'none'}")

    report = ScoreCheckReport(run_id=run_id, levels=[i, j], n_mc=config.n_mc,
                              n_truth=config.n_truth, verdicts=verdicts)
    write_checks(directory, report.model_dump())
    tracker.track_repetition(0, True)
    tracker.end_run()
    return report
