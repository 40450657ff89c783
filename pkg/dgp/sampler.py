"""
DgpSampler - population-level truth for the score checks

A reference pass freezes the treatment thresholds, the score scale, the
level values and the ξ scale; every later draw is assigned against those
frozen quantities, so samples of any size share one population law. True
propensities come from the closed-form ν CDF.
"""

import math
from typing import Optional, Tuple

import numpy as np

from data import ObservationTable, TreatmentCoding
from learners import CallableOutcomeModel, CallablePropensityModel
from learners.propensity import DEFAULT_CLIP
from scores import NuisancePoint, ScoreKind

from .config import DgpConfig
from .features import sample_features
from .generate import SyntheticSample, draw_xi
from .outcome import f_of_d, q_values
from .treatment import (
    analytic_propensities,
    assign_treatment,
    draw_nu,
    labels_from_scores,
    treatment_signal,
)

REFERENCE_ROWS = 20_000
TRUTH_CHUNK = 65_536


def _chunk_seed(seed: int, chunk: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(chunk,)).generate_state(1)[0])


class DgpSampler:
    """Draws samples from a fixed DGP population and knows its true θ values"""

    def __init__(self, config: DgpConfig, reference_rows: int = REFERENCE_ROWS, reference_seed: int = 0,
                 n_truth: int = 1_000_000, truth_seed: int = 1):
        self.config = config
        self.n_truth = int(n_truth)
        self.truth_seed = int(truth_seed)

        U, X, Z = sample_features(config, reference_rows, reference_seed)
        assignment = assign_treatment(X, Z, draw_nu(config, reference_rows, reference_seed), config)
        self.thresholds = assignment.thresholds
        self.scale = assignment.scale
        self.coding = TreatmentCoding(tuple(assignment.levels))
        self.f_levels = np.asarray(f_of_d(assignment.levels, config), dtype=float)

        noiseless = q_values(U, Z, config) * self.f_levels[assignment.labels]
        self.xi_scale = config.xi_ratio * float(np.std(noiseless, ddof=1))
        self.reference_balance = np.bincount(assignment.labels, minlength=config.n_levels)
        self._truth = None

    @property
    def n_levels(self) -> int:
        return self.config.n_levels

    @property
    def p_u(self) -> int:
        return self.config.p_u

    @property
    def p_x(self) -> int:
        return self.config.p_x

    @property
    def p_z(self) -> int:
        return self.config.p_z

    # --- nuisance truth -----------------------------------------------------

    def g_true(self, level: int, u: np.ndarray, z: np.ndarray) -> np.ndarray:
        return self.f_levels[level] * q_values(np.atleast_2d(u), np.atleast_2d(z), self.config)

    def propensity_true(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        signal = treatment_signal(np.atleast_2d(x), np.atleast_2d(z), self.config)
        return analytic_propensities(signal, self.thresholds, self.scale, self.config)

    def sample(self, n_rows: int, seed: int) -> SyntheticSample:
        config = self.config
        U, X, Z = sample_features(config, n_rows, seed)
        signal = treatment_signal(X, Z, config)
        latent = signal + draw_nu(config, n_rows, seed)
        labels = labels_from_scores(latent, self.thresholds, self.scale)
        q = q_values(U, Z, config)
        g = q[:, None] * self.f_levels[None, :]
        xi = draw_xi(n_rows, seed, self.xi_scale)
        table = ObservationTable(y=g[np.arange(n_rows), labels] + xi, d=labels, u=U, x=X, z=Z)
        return SyntheticSample(
            table=table, coding=self.coding, q=q, f_levels=self.f_levels, g=g,
            signal=signal, latent=latent, xi=xi,
            propensity=analytic_propensities(signal, self.thresholds, self.scale, config),
            thresholds=self.thresholds, scale=self.scale,
        )

    # --- population moments -------------------------------------------------

    def _accumulate_truth(self):
        """Running sums over n_truth rows for θ^i, θ^{i|j} and their standard errors"""
        n = self.n_levels
        sums = {
            'g': np.zeros(n), 'g2': np.zeros(n),
            'p': np.zeros(n), 'p2': np.zeros(n),
            'gp': np.zeros((n, n)), 'gp2': np.zeros((n, n)), 'gpp': np.zeros((n, n)),
        }
        for chunk, start in enumerate(range(0, self.n_truth, TRUTH_CHUNK)):
            rows = min(TRUTH_CHUNK, self.n_truth - start)
            U, X, Z = sample_features(self.config, rows, _chunk_seed(self.truth_seed, chunk))
            g = q_values(U, Z, self.config)[:, None] * self.f_levels[None, :]
            p = self.propensity_true(X, Z)
            gp = g[:, :, None] * p[:, None, :]
            sums['g'] += g.sum(axis=0)
            sums['g2'] += (g ** 2).sum(axis=0)
            sums['p'] += p.sum(axis=0)
            sums['p2'] += (p ** 2).sum(axis=0)
            sums['gp'] += gp.sum(axis=0)
            sums['gp2'] += (gp ** 2).sum(axis=0)
            sums['gpp'] += (gp * p[:, None, :]).sum(axis=0)
        self._truth = {key: value / self.n_truth for key, value in sums.items()}

    def _moments(self):
        if self._truth is None:
            self._accumulate_truth()
        return self._truth

    def marginals(self) -> np.ndarray:
        """m_j = P(D = j) = E[P_j(X, Z)]"""
        return self._moments()['p'].copy()

    def true_point(self) -> NuisancePoint:
        a_fns = [(lambda x, z, k=k: self.propensity_true(x, z)[:, k]) for k in range(self.n_levels)]
        return NuisancePoint(g_fn=self.g_true, a_fns=a_fns, m_vals=self.marginals())

    def theta_true(self, kind: ScoreKind) -> Tuple[float, float]:
        """(θ, standard error) from the truth sample; the same for every score family"""
        moments = self._moments()
        n = self.n_truth
        i, j = kind.i, kind.j
        if j is None:
            mean = moments['g'][i]
            var = max(moments['g2'][i] - mean ** 2, 0.0)
            return float(mean), math.sqrt(var / n)

        a, b = moments['gp'][i, j], moments['p'][j]
        ratio = a / b
        var_a = moments['gp2'][i, j] - a ** 2
        var_b = moments['p2'][j] - b ** 2
        cov = moments['gpp'][i, j] - a * b
        var = max(var_a - 2.0 * ratio * cov + ratio ** 2 * var_b, 0.0) / b ** 2
        return float(ratio), math.sqrt(var / n)

    # --- learner adapters ---------------------------------------------------

    def outcome_model(self) -> "TrueOutcomeModel":
        return TrueOutcomeModel(self)

    def propensity_model(self, clip: Optional[float] = None) -> "TruePropensityModel":
        return TruePropensityModel(self, clip=DEFAULT_CLIP if clip is None else clip)


class TrueOutcomeModel(CallableOutcomeModel):
    """The population g(d^i, u, z) as a fitted outcome model"""

    family = "TRUE"

    def __init__(self, sampler: DgpSampler):
        super().__init__(sampler.g_true, sampler.n_levels, sampler.p_u, sampler.p_z)


class TruePropensityModel(CallablePropensityModel):
    """The closed-form P_i(x, z) as a fitted propensity model"""

    family = "TRUE"

    def __init__(self, sampler: DgpSampler, clip: float = DEFAULT_CLIP):
        super().__init__(sampler.propensity_true, sampler.n_levels, sampler.p_x, sampler.p_z, clip)
