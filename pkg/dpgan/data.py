#!/usr/bin/env python3
"""
Dataset ingestion, schema handling and encoding

Tables are pandas DataFrames whose columns follow the schema's CSV layout:
categorical cells are level strings, continuous cells are floats, and a series
column of length L spreads over L columns ``<name>_0 .. <name>_{L-1}``.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

try:
    from .errors import ConfigError, DataError, SchemaError
except ImportError:
    from errors import ConfigError, DataError, SchemaError

# Create logger for this module
logger = logging.getLogger(__name__)

CONTINUOUS = 'continuous'
CATEGORICAL = 'categorical'
SERIES = 'series'

GAUSSIAN_COMPONENTS = 6
GAUSSIAN_RADIUS = 1.0
GAUSSIAN_STD = 0.1
GAUSSIAN_RANGE = 1.5
DEFAULT_SERIES_LENGTH = 96


@dataclass(frozen=True)
class Column:
    """One schema column"""
    name: str
    kind: str
    minimum: float = -1.0
    maximum: float = 1.0
    levels: Tuple[str, ...] = ()
    length: int = 1

    @property
    def width(self) -> int:
        """Encoded width of the column"""
        if self.kind == CATEGORICAL:
            return len(self.levels)
        if self.kind == SERIES:
            return self.length
        return 1

    @property
    def csv_names(self) -> List[str]:
        if self.kind == SERIES:
            return [f"{self.name}_{i}" for i in range(self.length)]
        return [self.name]

    def to_line(self) -> str:
        if self.kind == CATEGORICAL:
            return f"{self.name},{CATEGORICAL},{'|'.join(self.levels)}"
        if self.kind == SERIES:
            return f"{self.name},{SERIES},{self.length},{self.minimum!r},{self.maximum!r}"
        return f"{self.name},{CONTINUOUS},{self.minimum!r},{self.maximum!r}"


@dataclass(frozen=True)
class Schema:
    """Ordered column descriptions; order defines CSV and encoding order"""
    columns: Tuple[Column, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise SchemaError(f"Duplicate column names in schema: {duplicates}")
        for column in self.columns:
            if column.kind not in (CONTINUOUS, CATEGORICAL, SERIES):
                raise SchemaError(f"Column '{column.name}': unknown kind '{column.kind}'")
            if column.kind in (CONTINUOUS, SERIES) and not column.minimum < column.maximum:
                raise SchemaError(
                    f"Column '{column.name}': min {column.minimum} must be below max {column.maximum}"
                )
            if column.kind == CATEGORICAL:
                if len(column.levels) < 2:
                    raise SchemaError(f"Column '{column.name}': a categorical column needs at least 2 levels")
                if len(set(column.levels)) != len(column.levels):
                    raise SchemaError(f"Column '{column.name}': duplicate levels")
            if column.kind == SERIES and column.length < 1:
                raise SchemaError(f"Column '{column.name}': series length must be at least 1")

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]

    @property
    def csv_columns(self) -> List[str]:
        return [n for c in self.columns for n in c.csv_names]

    @property
    def width(self) -> int:
        return sum(c.width for c in self.columns)

    @property
    def width_map(self) -> Dict[str, Tuple[int, int]]:
        """Column name -> (start, stop) slice of the encoded row"""
        spans, offset = {}, 0
        for column in self.columns:
            spans[column.name] = (offset, offset + column.width)
            offset += column.width
        return spans

    def column(self, name: str) -> Column:
        for column in self.columns:
            if column.name == name:
                return column
        raise SchemaError(f"Schema has no column '{name}'")

    def without(self, name: str) -> 'Schema':
        self.column(name)
        return Schema(tuple(c for c in self.columns if c.name != name))

    def to_lines(self) -> List[str]:
        return [c.to_line() for c in self.columns]

    @classmethod
    def from_lines(cls, lines: Sequence[str], source: str = '<schema>') -> 'Schema':
        """
        Parse schema lines

        Formats:
            name,continuous,min,max
            name,categorical,level1|level2|...
            name,series,length[,min,max]
        Blank lines and lines starting with '#' are ignored.
        """
        columns = []
        for number, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            parts = [p.strip() for p in line.split(',')]
            where = f"{source}, line {number}"
            if len(parts) < 3:
                raise SchemaError(f"{where}: expected 'name,kind,...', got '{line}'")
            name, kind = parts[0], parts[1]
            try:
                if kind == CONTINUOUS:
                    if len(parts) != 4:
                        raise SchemaError(f"{where}: expected 'name,continuous,min,max'")
                    columns.append(Column(name, kind, minimum=float(parts[2]), maximum=float(parts[3])))
                elif kind == CATEGORICAL:
                    if len(parts) != 3:
                        raise SchemaError(f"{where}: expected 'name,categorical,level1|level2|...'")
                    levels = tuple(level.strip() for level in parts[2].split('|'))
                    columns.append(Column(name, kind, levels=levels))
                elif kind == SERIES:
                    if len(parts) not in (3, 5):
                        raise SchemaError(f"{where}: expected 'name,series,length[,min,max]'")
                    extra = {}
                    if len(parts) == 5:
                        extra = {'minimum': float(parts[3]), 'maximum': float(parts[4])}
                    columns.append(Column(name, kind, length=int(parts[2]), **extra))
                else:
                    raise SchemaError(f"{where}: unknown column kind '{kind}'")
            except ValueError as e:
                raise SchemaError(f"{where}: {e}") from e
        if not columns:
            raise SchemaError(f"{source}: schema declares no columns")
        try:
            return cls(tuple(columns))
        except SchemaError as e:
            raise SchemaError(f"{source}: {e}") from e


@dataclass
class EncodedDataset:
    """N x W matrix of one-hot and [-1, 1]-normalised cells"""
    rows: np.ndarray
    schema: Schema
    width_map: Dict[str, Tuple[int, int]] = field(init=False)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64).reshape(-1, self.schema.width)
        self.width_map = self.schema.width_map

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def subset(self, indices) -> 'EncodedDataset':
        return EncodedDataset(self.rows[indices], self.schema)


def load_schema(path) -> Schema:
    """Read a schema sidecar file"""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Schema file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        return Schema.from_lines(f.read().splitlines(), source=str(path))


def write_schema(schema: Schema, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(schema.to_lines()) + '\n')
    return path


def validate_table(table: pd.DataFrame, schema: Schema, source: str = '<table>') -> pd.DataFrame:
    """
    Check a table against the schema and return it with typed cells

    Raises:
        DataError: column mismatch, unparseable number, unknown level or
            out-of-range value; the message names the row and column
    """
    expected = schema.csv_columns
    if list(table.columns) != expected:
        raise DataError(f"{source}: columns {list(table.columns)} do not match schema columns {expected}")

    typed = {}
    for column in schema.columns:
        for name in column.csv_names:
            cells = table[name]
            if column.kind == CATEGORICAL:
                values = cells.astype(str).str.strip()
                unknown = ~values.isin(column.levels)
                if unknown.any():
                    row = int(np.flatnonzero(unknown.to_numpy())[0])
                    raise DataError(
                        f"{source}: row {row + 1}, column '{name}': unknown level '{values.iloc[row]}' "
                        f"(expected one of {list(column.levels)})"
                    )
                typed[name] = values.to_numpy(dtype=object)
                continue
            numbers = pd.to_numeric(cells, errors='coerce')
            bad = numbers.isna() | ~np.isfinite(numbers.to_numpy(dtype=np.float64))
            if bad.any():
                row = int(np.flatnonzero(bad.to_numpy())[0])
                raise DataError(f"{source}: row {row + 1}, column '{name}': cannot parse number '{cells.iloc[row]}'")
            values = numbers.to_numpy(dtype=np.float64)
            outside = (values < column.minimum) | (values > column.maximum)
            if outside.any():
                row = int(np.flatnonzero(outside)[0])
                raise DataError(
                    f"{source}: row {row + 1}, column '{name}': value {float(values[row])} outside "
                    f"[{float(column.minimum)}, {float(column.maximum)}]"
                )
            typed[name] = values
    return pd.DataFrame(typed, columns=expected)


def load_csv(path, schema: Schema) -> pd.DataFrame:
    """
    Load a UTF-8 CSV with a header row matching the schema

    Returns:
        Typed table; an empty data section gives an empty table
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Data file not found: {path}")
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError as e:
        raise DataError(f"{path}: file is empty (no header row)") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: cannot parse CSV: {e}") from e
    table = validate_table(raw, schema, source=str(path))
    logger.info(f"Loaded {len(table)} rows from {path}")
    return table


def write_csv(table: pd.DataFrame, path, schema: Optional[Schema] = None) -> Path:
    """Write a table as CSV; floats are written round-trip exact"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if schema is not None:
        table = table[schema.csv_columns]
    table.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')
    return path


def _to_unit(values: np.ndarray, column: Column) -> np.ndarray:
    return 2.0 * (values - column.minimum) / (column.maximum - column.minimum) - 1.0


def _from_unit(values: np.ndarray, column: Column) -> np.ndarray:
    restored = (values + 1.0) / 2.0 * (column.maximum - column.minimum) + column.minimum
    return np.clip(restored, column.minimum, column.maximum)


def encode(table: pd.DataFrame, schema: Schema) -> EncodedDataset:
    """
    Map a table to the model's numeric encoding

    Continuous and series cells go to 2 (x - min) / (max - min) - 1; categorical
    cells become one-hot groups in level order.
    """
    table = validate_table(table, schema)
    rows = np.zeros((len(table), schema.width))
    spans = schema.width_map
    for column in schema.columns:
        start, stop = spans[column.name]
        if column.kind == CATEGORICAL:
            codes = pd.Categorical(table[column.name], categories=column.levels).codes
            rows[np.arange(len(table)), start + codes] = 1.0
        else:
            values = table[column.csv_names].to_numpy(dtype=np.float64)
            rows[:, start:stop] = _to_unit(values, column)
    return EncodedDataset(rows, schema)


def decode_rows(rows: np.ndarray, schema: Schema) -> pd.DataFrame:
    """Inverse of ``encode``; categorical groups decode to their argmax level"""
    rows = np.asarray(rows, dtype=np.float64).reshape(-1, schema.width)
    spans = schema.width_map
    data = {}
    for column in schema.columns:
        start, stop = spans[column.name]
        if column.kind == CATEGORICAL:
            codes = np.argmax(rows[:, start:stop], axis=1)
            data[column.name] = np.asarray(column.levels, dtype=object)[codes]
        else:
            restored = _from_unit(rows[:, start:stop], column)
            for i, name in enumerate(column.csv_names):
                data[name] = restored[:, i]
    return pd.DataFrame(data, columns=schema.csv_columns)


def decode(dataset: EncodedDataset) -> pd.DataFrame:
    return decode_rows(dataset.rows, dataset.schema)


def check_encoding(dataset: EncodedDataset):
    """
    Verify one-hot groups hold exactly one 1 and numeric cells lie in [-1, 1]

    Raises:
        DataError: naming the first violating row and column
    """
    for column in dataset.schema.columns:
        start, stop = dataset.width_map[column.name]
        block = dataset.rows[:, start:stop]
        if column.kind == CATEGORICAL:
            valid = np.all((block == 0.0) | (block == 1.0), axis=1) & (block.sum(axis=1) == 1.0)
        else:
            valid = np.all((block >= -1.0) & (block <= 1.0), axis=1)
        if not valid.all():
            row = int(np.flatnonzero(~valid)[0])
            raise DataError(f"Encoded row {row}: column '{column.name}' violates the encoding")


def label_codes(table: pd.DataFrame, schema: Schema, label: str) -> np.ndarray:
    """Integer level index of the label column"""
    column = schema.column(label)
    if column.kind != CATEGORICAL:
        raise SchemaError(f"Label column '{label}' must be categorical")
    return pd.Categorical(table[label], categories=column.levels).codes.astype(np.int64)


def feature_matrix(table: pd.DataFrame, schema: Schema, label: str) -> Tuple[np.ndarray, np.ndarray]:
    """Encoded features without the label column, and the label codes"""
    features = schema.without(label)
    encoded = encode(table[features.csv_columns], features)
    return encoded.rows, label_codes(table, schema, label)


def balanced_split(table: pd.DataFrame, label_column: str, test_fraction: float, seed: int):
    """
    Split into train and test sets that are both exactly 50/50 in a binary label

    The minority class size governs: each class contributes the same number of
    rows, which are then divided between the splits.

    Returns:
        tuple: (train, test) tables with fresh indices
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = table[label_column].astype(str).to_numpy()
    classes = sorted(set(labels))
    if len(classes) != 2:
        raise DataError(f"Label column '{label_column}' must be binary; found {len(classes)} classes")

    rng = np.random.default_rng(seed)
    per_class = min(int(np.sum(labels == c)) for c in classes)
    n_test = min(per_class - 1, max(1, int(round(per_class * test_fraction))))
    if n_test < 1:
        raise DataError(f"Label column '{label_column}': minority class too small to split")

    train_idx, test_idx = [], []
    for c in classes:
        members = rng.permutation(np.flatnonzero(labels == c))[:per_class]
        test_idx.append(members[:n_test])
        train_idx.append(members[n_test:])
    train_order = rng.permutation(np.concatenate(train_idx))
    test_order = rng.permutation(np.concatenate(test_idx))
    train = table.iloc[train_order].reset_index(drop=True)
    test = table.iloc[test_order].reset_index(drop=True)
    logger.info(f"Balanced split on '{label_column}': {len(train)} train / {len(test)} test rows")
    return train, test


def hexagon_centers(radius: float = GAUSSIAN_RADIUS) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(GAUSSIAN_COMPONENTS) / GAUSSIAN_COMPONENTS
    return radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def gaussian_mixture_schema() -> Schema:
    return Schema((
        Column('x', CONTINUOUS, minimum=-GAUSSIAN_RANGE, maximum=GAUSSIAN_RANGE),
        Column('y', CONTINUOUS, minimum=-GAUSSIAN_RANGE, maximum=GAUSSIAN_RANGE),
        Column('component', CATEGORICAL, levels=tuple(f"c{k}" for k in range(GAUSSIAN_COMPONENTS))),
    ))


def make_gaussian_mixture(n: int, seed: int) -> pd.DataFrame:
    """
    Six equal-variance 2-D Gaussians centred on a regular hexagon

    Components are assigned round-robin before shuffling, so every component
    gets floor(n/6) or ceil(n/6) points. Points are clipped to the schema
    range (five standard deviations beyond the hexagon).
    """
    if n < GAUSSIAN_COMPONENTS:
        raise ConfigError(f"Gaussian mixture needs n >= {GAUSSIAN_COMPONENTS}, got {n}")
    rng = np.random.default_rng(seed)
    components = rng.permutation(np.arange(n) % GAUSSIAN_COMPONENTS)
    points = hexagon_centers()[components] + rng.normal(0.0, GAUSSIAN_STD, size=(n, 2))
    points = np.clip(points, -GAUSSIAN_RANGE, GAUSSIAN_RANGE)
    return pd.DataFrame({
        'x': points[:, 0],
        'y': points[:, 1],
        'component': np.array([f"c{k}" for k in components], dtype=object),
    })


def timeseries_schema(length: int = DEFAULT_SERIES_LENGTH, n_regions: int = 4) -> Schema:
    return Schema((
        Column('consumption', SERIES, length=length),
        Column('region', CATEGORICAL, levels=tuple(f"r{k}" for k in range(n_regions))),
    ))


def make_timeseries(n: int, length: int = DEFAULT_SERIES_LENGTH, seed: int = 0, n_regions: int = 4) -> pd.DataFrame:
    """
    Daily consumption-like series with a morning and an evening peak

    Each region has its own peak amplitudes and timing; each series adds
    amplitude and phase jitter plus observation noise. The whole set is
    min-max normalised to [-1, 1].
    """
    if length < 2:
        raise ConfigError(f"Series length must be at least 2, got {length}")
    if n < 1:
        raise ConfigError(f"Series count must be positive, got {n}")
    if n_regions < 2:
        raise ConfigError(f"Need at least 2 regions, got {n_regions}")
    rng = np.random.default_rng(seed)
    t = np.arange(length) / length

    # Region profiles are fixed; only the per-series draws depend on the seed
    profile_rng = np.random.default_rng(0)
    morning_amp = profile_rng.uniform(0.5, 1.0, n_regions)
    evening_amp = profile_rng.uniform(0.6, 1.2, n_regions)
    shift = profile_rng.uniform(-0.04, 0.04, n_regions)

    regions = rng.integers(0, n_regions, size=n)
    amplitude = rng.normal(1.0, 0.1, size=(n, 1))
    phase = rng.normal(0.0, 0.015, size=(n, 1)) + shift[regions][:, None]
    base = (
        morning_amp[regions][:, None] * np.exp(-(((t - 0.30 - phase) / 0.07) ** 2))
        + evening_amp[regions][:, None] * np.exp(-(((t - 0.80 - phase) / 0.08) ** 2))
        + 0.2
    )
    values = amplitude * base + rng.normal(0.0, 0.05, size=(n, length))
    low, high = values.min(), values.max()
    normalised = 2.0 * (values - low) / max(high - low, math.ulp(1.0)) - 1.0
    normalised = np.clip(normalised, -1.0, 1.0)

    data = {f"consumption_{i}": normalised[:, i] for i in range(length)}
    data['region'] = np.array([f"r{k}" for k in regions], dtype=object)
    return pd.DataFrame(data)
