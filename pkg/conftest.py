"""
Shared pytest fixtures: the two-credit-line worked example and small random tables
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from data import ObservationTable, TreatmentCoding  # noqa: E402
from learners import CallableOutcomeModel, TabulatedPropensityModel  # noqa: E402

CREDIT_LINES = (1000.0, 2000.0)

# (z, x, u, d, y)
TRAIN_ROWS = [
    (1000, 21, 500, 1000, 0.095), (2000, 22, 1000, 1000, 0.090), (3000, 23, 1500, 1000, 0.087),
    (4000, 24, 2000, 1000, 0.080), (5000, 25, 2500, 1000, 0.075), (6000, 26, 3000, 2000, 0.569),
    (7000, 27, 3500, 2000, 0.566), (8000, 28, 4000, 2000, 0.562), (9000, 29, 4500, 2000, 0.553),
    (10000, 30, 5000, 2000, 0.551),
]
EVAL_ROWS = [
    (3000, 20, 500, 1000, 0.075), (4000, 22, 1000, 1000, 0.071),
    (8000, 24, 1500, 2000, 0.533), (8000, 26, 3000, 2000, 0.541),
]
# printed per-individual predictions of the fitted outcome model, one column per credit line
EVAL_G_HAT = np.array([
    [0.08750311, 0.08846092],
    [0.08244466, 0.08318813],
    [0.06524595, 0.06526066],
    [0.05816412, 0.05787875],
])
EVAL_PROBS = np.array([[0.9818, 0.0182], [0.9005, 0.0995], [0.0001, 0.9999], [0.0, 1.0]])
EVAL_G_TRUE = np.array([[0.075, 0.575], [0.071, 0.571], [0.037, 0.533], [0.040, 0.541]])

# printed outcome-model coefficients as (u, z) slopes and intercept per credit line
PRINTED_COEF = np.array([[-2.023378e-6, -4.046756e-6], [-2.10911e-6, -4.218229e-6]])
PRINTED_INTERCEPT = np.array([0.100655, 0.10217])

CLIP = 1e-4


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow Monte-Carlo tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte-Carlo or desk-scale test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def _table(rows, coding: TreatmentCoding) -> ObservationTable:
    rows = np.asarray(rows, dtype=float)
    return ObservationTable(
        y=rows[:, 4], d=coding.encode(rows[:, 3]),
        u=rows[:, [2]], x=rows[:, [1]], z=rows[:, [0]],
    )


@pytest.fixture
def credit_coding():
    return TreatmentCoding(CREDIT_LINES)


@pytest.fixture
def credit_train(credit_coding):
    return _table(TRAIN_ROWS, credit_coding)


@pytest.fixture
def credit_eval(credit_coding):
    return _table(EVAL_ROWS, credit_coding)


@pytest.fixture
def printed_outcome_model(credit_eval):
    """ĝ returning the printed predictions for the four held-out individuals"""
    lookup = {(u, z): k for k, (u, z) in enumerate(zip(credit_eval.u[:, 0], credit_eval.z[:, 0]))}

    def g_hat(level, u, z):
        return np.array([EVAL_G_HAT[lookup[(a, b)], level] for a, b in zip(u[:, 0], z[:, 0])])

    return CallableOutcomeModel(g_hat, n_levels=2, p_u=1, p_z=1)


@pytest.fixture
def printed_propensity_model(credit_eval):
    return TabulatedPropensityModel(credit_eval.x, credit_eval.z, EVAL_PROBS, clip=CLIP)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_table(rng, n_rows=200, n_levels=3, p_u=2, p_x=2, p_z=2, noise=0.1):
    """Table with a level-dependent linear outcome and a logistic treatment"""
    u = rng.standard_normal((n_rows, p_u))
    x = rng.standard_normal((n_rows, p_x))
    z = rng.standard_normal((n_rows, p_z))
    logits = np.column_stack([k * (x[:, 0] + z[:, 0]) for k in range(n_levels)])
    probs = np.exp(logits - logits.max(axis=1, keepdims=True))
    probs /= probs.sum(axis=1, keepdims=True)
    d = np.array([rng.choice(n_levels, p=p) for p in probs])
    y = 1.0 + 0.5 * d + u.sum(axis=1) - z.sum(axis=1) + noise * rng.standard_normal(n_rows)
    return ObservationTable(y=y, d=d, u=u, x=x, z=z)


@pytest.fixture
def small_table(rng):
    return random_table(rng)


@pytest.fixture
def credit_true_g():
    """Counterfactual outcomes of the four held-out individuals under each credit line"""
    return EVAL_G_TRUE.copy()


@pytest.fixture
def printed_linear_model():
    from learners import LinearOutcomeModel

    return LinearOutcomeModel("OLS", PRINTED_COEF, PRINTED_INTERCEPT, per_level=True,
                              n_levels=2, p_u=1, p_z=1)


@pytest.fixture
def make_table(rng):
    """Factory for random_table sharing the test's generator"""
    def make(**kwargs):
        return random_table(rng, **kwargs)

    return make
