"""
Observation tables, treatment coding and train/test splits

Treatment labels are dense 0-based indices into TreatmentCoding.levels; the
real-valued levels are only needed by the data generator and the CSV layer.
"""

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from errors import (
    ConfigError,
    DegenerateSplit,
    ImpactError,
    NonFiniteValue,
    ShapeMismatch,
    TableValidationError,
    UnknownTreatmentLabel,
)


def _frozen(values, ndim: int, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if ndim == 2 and arr.ndim == 1:
        arr = arr.reshape(0, 0) if arr.size == 0 else arr.reshape(-1, 1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TreatmentCoding:
    """Ordered real values d^1 < ... < d^n of the treatment levels"""

    levels: Tuple[float, ...]

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        object.__setattr__(self, 'levels', levels)
        if len(levels) < 2:
            raise ConfigError("a treatment coding needs at least 2 levels")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ConfigError(f"treatment levels must be strictly increasing: {levels}")

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def encode(self, raw: Sequence[float]) -> np.ndarray:
        """Map raw treatment values to label indices (exact equality)"""
        lookup = {value: index for index, value in enumerate(self.levels)}
        labels = np.empty(len(raw), dtype=np.int64)
        for row, value in enumerate(raw):
            try:
                labels[row] = lookup[float(value)]
            except KeyError:
                raise UnknownTreatmentLabel(row, value) from None
        return labels

    def decode(self, labels: np.ndarray) -> np.ndarray:
        return np.asarray(self.levels)[np.asarray(labels, dtype=np.int64)]


@dataclass(frozen=True)
class ObservationTable:
    """N records of (y, d, u, x, z); arrays are read-only after construction"""

    y: np.ndarray
    d: np.ndarray
    u: np.ndarray
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'y', _frozen(self.y, 1))
        object.__setattr__(self, 'd', _frozen(self.d, 1, dtype=np.int64))
        for name in ('u', 'x', 'z'):
            object.__setattr__(self, name, _frozen(getattr(self, name), 2))

    @property
    def n_rows(self) -> int:
        return len(self.y)

    @property
    def p_u(self) -> int:
        return self.u.shape[1]

    @property
    def p_x(self) -> int:
        return self.x.shape[1]

    @property
    def p_z(self) -> int:
        return self.z.shape[1]

    def take(self, rows: np.ndarray) -> "ObservationTable":
        rows = np.asarray(rows, dtype=np.int64)
        return ObservationTable(
            y=self.y[rows], d=self.d[rows], u=self.u[rows], x=self.x[rows], z=self.z[rows]
        )

    def with_outcome(self, y: np.ndarray) -> "ObservationTable":
        return ObservationTable(y=y, d=self.d, u=self.u, x=self.x, z=self.z)

    def column_names(self) -> List[str]:
        return (
            ['y', 'd']
            + [f'u_{k + 1}' for k in range(self.p_u)]
            + [f'x_{k + 1}' for k in range(self.p_x)]
            + [f'z_{k + 1}' for k in range(self.p_z)]
        )


@dataclass(frozen=True)
class SplitIndex:
    train_rows: np.ndarray
    test_rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'train_rows', _frozen(self.train_rows, 1, dtype=np.int64))
        object.__setattr__(self, 'test_rows', _frozen(self.test_rows, 1, dtype=np.int64))


def validate_table(table: ObservationTable, coding: TreatmentCoding) -> ObservationTable:
    """Return the table unchanged if every invariant holds.

    A single violation is raised as itself; several are bundled into a
    TableValidationError listing each one.
    """
    problems: List[ImpactError] = []
    n = table.n_rows
    if n < 1:
        problems.append(ShapeMismatch("table has no rows"))
    for name in ('d', 'u', 'x', 'z'):
        rows = getattr(table, name).shape[0]
        if rows != n:
            problems.append(ShapeMismatch(f"column block '{name}' has {rows} rows, y has {n}"))
    if problems:
        _raise(problems)

    for row in np.flatnonzero(~np.isfinite(table.y)):
        problems.append(NonFiniteValue(int(row), 'y'))
    for block in ('u', 'x', 'z'):
        values = getattr(table, block)
        rows, cols = np.nonzero(~np.isfinite(values))
        for row, col in zip(rows, cols):
            problems.append(NonFiniteValue(int(row), f'{block}_{col + 1}'))

    bad = (table.d < 0) | (table.d >= coding.n_levels)
    for row in np.flatnonzero(bad):
        problems.append(UnknownTreatmentLabel(int(row), int(table.d[row])))

    if problems:
        _raise(problems)
    return table


def _raise(problems: List[ImpactError]):
    if len(problems) == 1:
        raise problems[0]
    raise TableValidationError(problems)


def split_train_test(table: ObservationTable, fraction: float, seed: int,
                     n_levels: Optional[int] = None) -> SplitIndex:
    """Uniformly shuffled train/test split; |train| = round(fraction * N)"""
    n = table.n_rows
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"split fraction must lie in (0, 1), got {fraction}")
    if n < 2:
        raise DegenerateSplit(f"cannot split a table of {n} row(s)")
    n_train = int(np.floor(fraction * n + 0.5))
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(
            f"fraction {fraction} on {n} rows leaves one side empty ({n_train} train rows)"
        )

    order = np.random.default_rng(seed).permutation(n)
    split = SplitIndex(train_rows=np.sort(order[:n_train]), test_rows=np.sort(order[n_train:]))

    if n_levels is not None:
        present = np.unique(table.d[split.train_rows])
        missing = sorted(set(range(n_levels)) - set(present.tolist()))
        if missing:
            warnings.warn(f"treatment levels {missing} absent from the train split")
    return split


def subpopulation(table: ObservationTable, level: int,
                  rows: Optional[np.ndarray] = None) -> Tuple[np.ndarray, int]:
    """Row indices with d == level (restricted to `rows` if given) and their count"""
    if rows is None:
        index = np.flatnonzero(table.d == level)
    else:
        rows = np.asarray(rows, dtype=np.int64)
        index = rows[table.d[rows] == level]
    return index, int(index.size)


# --- CSV --------------------------------------------------------------------

def _block_columns(columns: Sequence[str], prefix: str) -> List[str]:
    names = [c for c in columns if c.startswith(prefix) and c[len(prefix):].isdigit()]
    return sorted(names, key=lambda c: int(c[len(prefix):]))


def features_from_frame(frame: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Extract the (U, X, Z) blocks from u_*, x_*, z_* columns"""
    blocks = []
    for prefix in ('u_', 'x_', 'z_'):
        cols = _block_columns(frame.columns, prefix)
        blocks.append(frame[cols].to_numpy(dtype=float) if cols else np.zeros((len(frame), 0)))
    return blocks[0], blocks[1], blocks[2]


def read_table_csv(path: Union[str, Path],
                   coding: Optional[TreatmentCoding] = None) -> Tuple[ObservationTable, TreatmentCoding]:
    """Load the `y, d, u_*, x_*, z_*` layout; the coding defaults to the sorted distinct d values"""
    frame = pd.read_csv(path)
    for required in ('y', 'd'):
        if required not in frame.columns:
            raise ShapeMismatch(f"{path}: missing required column '{required}'")
    raw_d = frame['d'].to_numpy(dtype=float)
    if coding is None:
        coding = TreatmentCoding(tuple(np.unique(raw_d)))
    u, x, z = features_from_frame(frame)
    table = ObservationTable(y=frame['y'].to_numpy(dtype=float), d=coding.encode(raw_d), u=u, x=x, z=z)
    return validate_table(table, coding), coding


def read_features_csv(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    frame = pd.read_csv(path)
    u, x, z = features_from_frame(frame)
    for block, name in ((u, 'u'), (x, 'x'), (z, 'z')):
        if not np.all(np.isfinite(block)):
            rows, cols = np.nonzero(~np.isfinite(block))
            raise NonFiniteValue(int(rows[0]), f'{name}_{cols[0] + 1}')
    return u, x, z


def table_to_frame(table: ObservationTable, coding: TreatmentCoding) -> pd.DataFrame:
    data = np.column_stack([table.y, coding.decode(table.d), table.u, table.x, table.z])
    return pd.DataFrame(data, columns=table.column_names())


def write_table_csv(table: ObservationTable, coding: TreatmentCoding, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table_to_frame(table, coding).to_csv(path, index=False, float_format='%.17g')
    return path
