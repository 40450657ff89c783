"""
DgpConfig - every coefficient of the outcome and treatment laws plus the
tail, correlation, causality and nonlinearity knobs

Two presets ship with the toolkit: `DgpConfig.simulated` (interaction-rich
k functions on correlated synthetic features) and `DgpConfig.semi_synthetic`
(linear k functions, intended for real feature tables).
"""

from enum import Enum
from math import comb
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from errors import ConfigError

# seed for the standard-normal c-vectors of the simulated preset
C_VECTOR_SEED = 20_230_417

A0_SIMULATED = [0.15, 0.15, 0.15, 0.0, 0.15] + [0.0] * 15

A1 = [
    0.0797029, -1.76102223, -0.91346963, 0.68418344, 0.64784692,
    0.67517954, 1.46044727, -0.77882898, -0.2116248, 1.01021167,
]

A2 = [
    1.15372801, 1.22690352, 0.684614, 1.47078252, -0.42191908,
    -0.11914525, -0.24666433, 0.01059945, -0.7072146, -0.47233888,
    0.41497956, 0.94239603, 2.25119595, -0.1074173, 0.41419469,
    -0.46030413, 1.52607699, 0.56253337, -0.82265637, -0.99873261,
]

C1_Z_EMPIRICAL = [
    -0.09656428735342949, 0.9734025822882408, -0.8582891237280186, -0.30860415187183593,
    -0.28146793638372014, -2.1733362770260594, 1.07992405679886, -0.48654644176178413,
    0.9186030042716846, -0.3898601365276411, 0.5508196301315733, 1.214349568204593,
    0.5911358538192414, -0.039596488856784254, -0.2689273104251347, -0.49321543083682934,
    0.20597029681886586, -0.4562984857686687, 1.0593842547558803, -0.2403438672537869,
]

C1_U_EMPIRICAL = [
    0.40284599, -1.72689173, -1.06178813, -1.34073716, 1.48927656,
    -1.10148294, -0.31908929, -1.93599287, 0.23803084, -0.00819786,
]


class Tail(str, Enum):
    LIGHT = "light"
    HEAVY = "heavy"


class KMode(str, Enum):
    SIMULATED = "simulated"
    LINEAR = "linear"


class NoiseLaw(str, Enum):
    NORMAL = "normal"
    STUDENT_T = "student_t"


class PropensityTruth(str, Enum):
    RESAMPLE = "resample"
    ANALYTIC = "analytic"


class BlockCorrelation(BaseModel):
    """C_ij = a + (1 - a) exp(-b |i - j|)"""

    a: float = Field(ge=0.0, le=1.0)
    b: float = Field(gt=0.0)


LIGHT_CORRELATION = {
    'u': BlockCorrelation(a=0.8, b=0.2),
    'x': BlockCorrelation(a=0.2, b=2.0),
    'z': BlockCorrelation(a=0.5, b=0.5),
}
HEAVY_CORRELATION = {
    'u': BlockCorrelation(a=0.8, b=0.2),
    'x': BlockCorrelation(a=0.5, b=0.5),
    'z': BlockCorrelation(a=0.5, b=0.5),
}
HEAVY_DOF = {'u': 10.0, 'x': 10.0, 'z': 5.0}


class DgpConfig(BaseModel):
    """Y = f(D) q(U, Z) + ξ with D the quintile of λ(...) + ν"""

    schema_version: int = 1

    alpha: float = Field(0.05, ge=0.0, le=1.0)
    beta: float = Field(0.05, ge=0.0, le=1.0)
    power_m: float = Field(1.0, gt=0.0)
    power_n: float = Field(2.0, gt=0.0)

    # q(U, Z)
    a0: List[float]
    e1: float
    e2: float
    tau: float
    r_exp: float

    # latent treatment score
    a1: List[float]
    a2: List[float]
    lam: float
    gamma: float
    b1: float
    b2: float

    k_mode: KMode = KMode.SIMULATED
    c_z: List[List[float]]
    c_u: List[List[float]]

    tail: Tail = Tail.LIGHT
    correlation: Dict[str, BlockCorrelation] = Field(default_factory=lambda: dict(LIGHT_CORRELATION))
    dof: Dict[str, float] = Field(default_factory=lambda: dict(HEAVY_DOF))

    nu_law: NoiseLaw = NoiseLaw.NORMAL
    nu_scale: float = Field(1.0, gt=0.0)
    nu_dof: float = Field(5.0, gt=2.0)
    xi_ratio: float = Field(0.1, ge=0.0)

    n_levels: int = Field(5, ge=2)
    p_u: int = Field(10, ge=1)
    p_x: int = Field(10, ge=1)
    p_z: int = Field(20, ge=1)

    n_nu: int = Field(2000, ge=1)
    propensity_truth: PropensityTruth = PropensityTruth.RESAMPLE

    @model_validator(mode='after')
    def _check_dimensions(self) -> "DgpConfig":
        expect = {'a0': self.p_z, 'a1': self.p_x, 'a2': self.p_z}
        for name, size in expect.items():
            if len(getattr(self, name)) != size:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries, expected {size}")
        orders = 4 if self.k_mode == KMode.SIMULATED else 1
        for name, p in (('c_z', self.p_z), ('c_u', self.p_u)):
            vectors = getattr(self, name)
            if len(vectors) != orders:
                raise ValueError(f"{name} needs {orders} coefficient vector(s), got {len(vectors)}")
            for r, vec in enumerate(vectors, start=1):
                if len(vec) != comb(p, r):
                    raise ValueError(f"{name}[{r - 1}] has {len(vec)} entries, expected C({p},{r})")
        if (self.b1 != 0.0 or self.b2 != 0.0) and self.p_x < 10:
            raise ValueError("ratio terms use X3, X6, X9 and X10; p_x must be >= 10")
        for block in ('u', 'x', 'z'):
            if block not in self.correlation:
                raise ValueError(f"correlation parameters missing for block '{block}'")
            if self.tail == Tail.HEAVY and self.dof.get(block, 0.0) <= 2.0:
                raise ValueError(f"heavy-tail dof for block '{block}' must exceed 2")
        return self

    # --- presets ------------------------------------------------------------

    @staticmethod
    def simulated_c_vectors(p: int, seed: int) -> List[List[float]]:
        rng = np.random.default_rng(seed)
        return [rng.standard_normal(comb(p, r)).tolist() for r in range(1, 5)]

    @classmethod
    def simulated(cls, alpha: float = 0.05, beta: float = 0.05, tail: Union[Tail, str] = Tail.LIGHT,
                  c_seed: int = C_VECTOR_SEED, **overrides) -> "DgpConfig":
        tail = Tail(tail)
        params = dict(
            alpha=alpha, beta=beta,
            a0=list(A0_SIMULATED), e1=0.1, e2=0.0, tau=1.5, r_exp=0.5,
            a1=list(A1), a2=list(A2), lam=1.0, gamma=2.0, b1=1.775, b2=-1.354,
            k_mode=KMode.SIMULATED,
            c_z=cls.simulated_c_vectors(20, c_seed),
            c_u=cls.simulated_c_vectors(10, c_seed + 1),
            tail=tail,
            correlation=dict(HEAVY_CORRELATION if tail == Tail.HEAVY else LIGHT_CORRELATION),
        )
        params.update(overrides)
        return cls(**params)

    @classmethod
    def semi_synthetic(cls, alpha: float = 0.05, beta: float = 0.05, **overrides) -> "DgpConfig":
        params = dict(
            alpha=alpha, beta=beta,
            a0=list(C1_Z_EMPIRICAL), e1=1.0, e2=1.0, tau=1.5, r_exp=0.5,
            a1=list(A1), a2=list(A2), lam=0.0507, gamma=0.5896, b1=0.0, b2=0.0,
            k_mode=KMode.LINEAR,
            c_z=[list(C1_Z_EMPIRICAL)],
            c_u=[list(C1_U_EMPIRICAL)],
        )
        params.update(overrides)
        return cls(**params)

    # --- IO -------------------------------------------------------------------

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2))
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DgpConfig":
        try:
            return cls.model_validate_json(Path(path).read_text())
        except ValueError as exc:
            raise ConfigError(f"invalid DGP config {path}: {exc}") from exc

    def with_knobs(self, alpha: Optional[float] = None, beta: Optional[float] = None,
                   tail: Optional[Union[Tail, str]] = None) -> "DgpConfig":
        """Copy with the causality / nonlinearity / tail knobs replaced"""
        update: Dict[str, object] = {}
        if alpha is not None:
            update['alpha'] = alpha
        if beta is not None:
            update['beta'] = beta
        if tail is not None:
            tail = Tail(tail)
            update['tail'] = tail
            update['correlation'] = dict(HEAVY_CORRELATION if tail == Tail.HEAVY else LIGHT_CORRELATION)
        return DgpConfig.model_validate({**self.model_dump(), **update})

    def block_dims(self) -> Dict[str, int]:
        return {'u': self.p_u, 'x': self.p_x, 'z': self.p_z}


def knob_tuple(config: DgpConfig) -> Tuple[float, float, str]:
    return config.alpha, config.beta, config.tail.value
