"""Core data model: feature values, schemas, datasets and per-time counting.

A dataset is a long-format table with one row per (student, time step).
Rows, not students, are the unit being clustered: a student contributes one
row per time step they appear in, and how the rows of a cluster distribute
over time is what the rest of the library analyses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

#: Sentinel for an absent feature value.
MISSING = None

#: Reserved category token standing in for missing values of categorical
#: features (missing is treated as one more category there).
MISSING_CATEGORY = "__missing__"

FeatureValue = float | str | None


class FeatureKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: FeatureKind
    allow_missing: bool = False


@dataclass(frozen=True)
class Schema:
    """Ordered feature declarations.

    Order is significant: it is the column order of the on-disk format and
    the deterministic tie-break order of the split search.
    """

    features: tuple[FeatureSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise ValueError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if any(not n for n in names):
            raise ValueError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise ValueError(f"unknown feature: {name!r}")

    def feature(self, name: str) -> FeatureSpec:
        return self.features[self.index_of(name)]


@dataclass(frozen=True)
class Row:
    """One student's record at one time step.

    ``time_index`` is the 1-based position of the row's time identifier in
    ``Dataset.times``.
    """

    student: str
    time_index: int
    values: tuple[FeatureValue, ...]


@dataclass
class Dataset:
    """Immutable long-format table plus cached column views.

    ``times`` holds the distinct time identifiers sorted ascending; rows
    reference them through 1-based ``time_index``. Treat instances as
    frozen after construction; the column cache is the only mutable state
    and is derived data.
    """

    schema: Schema
    times: tuple[int, ...]
    rows: tuple[Row, ...]
    _columns: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.times = tuple(self.times)
        self.rows = tuple(self.rows)

    @property
    def n_times(self) -> int:
        return len(self.times)

    @property
    def n_features(self) -> int:
        return len(self.schema.features)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_students(self) -> int:
        return len({r.student for r in self.rows})

    def time_indices0(self) -> np.ndarray:
        """0-based time index per row, as an intp array."""
        arr = self._columns.get("time")
        if arr is None:
            arr = np.fromiter(
                (r.time_index - 1 for r in self.rows),
                dtype=np.intp,
                count=len(self.rows),
            )
            self._columns["time"] = arr
        return arr

    def numeric_column(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """Values of a numeric feature as (float64 array, missing mask).

        Missing entries hold NaN in the value array.
        """
        fs = self.schema.feature(name)
        if fs.kind is not FeatureKind.NUMERIC:
            raise ValueError(f"feature {name!r} is not numeric")
        key = ("num", name)
        cached = self._columns.get(key)
        if cached is None:
            j = self.schema.index_of(name)
            n = len(self.rows)
            vals = np.empty(n, dtype=np.float64)
            miss = np.zeros(n, dtype=bool)
            for i, r in enumerate(self.rows):
                v = r.values[j]
                if v is MISSING:
                    vals[i] = np.nan
                    miss[i] = True
                else:
                    vals[i] = v
            cached = (vals, miss)
            self._columns[key] = cached
        return cached

    def numeric_order(self, name: str) -> np.ndarray:
        """Row indices sorted ascending by a numeric feature (missing last).

        Sorted once per feature; cluster-local sweeps derive their order by
        filtering this, avoiding a sort per tree node.
        """
        key = ("order", name)
        cached = self._columns.get(key)
        if cached is None:
            values, _ = self.numeric_column(name)
            cached = np.argsort(values, kind="stable")
            self._columns[key] = cached
        return cached

    def categorical_column(self, name: str) -> np.ndarray:
        """Tokens of a categorical feature; missing becomes MISSING_CATEGORY."""
        fs = self.schema.feature(name)
        if fs.kind is not FeatureKind.CATEGORICAL:
            raise ValueError(f"feature {name!r} is not categorical")
        key = ("cat", name)
        cached = self._columns.get(key)
        if cached is None:
            j = self.schema.index_of(name)
            cached = np.array(
                [MISSING_CATEGORY if r.values[j] is MISSING else r.values[j] for r in self.rows],
                dtype=object,
            )
            self._columns[key] = cached
        return cached


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_dataset."""

    code: str
    message: str
    row: int | None = None
    feature: str | None = None


def validate_dataset(dataset: Dataset) -> list[Violation]:
    """Check every dataset invariant and return all violations found.

    An empty list means the dataset is well-formed; violations are data,
    not exceptions.
    """
    out: list[Violation] = []
    times = dataset.times
    if len(times) < 1:
        out.append(Violation("no-times", "dataset has no time steps"))
    for i in range(len(times) - 1):
        if times[i] >= times[i + 1]:
            out.append(Violation("times-unsorted", "times must be strictly ascending"))
            break
    if not dataset.rows:
        out.append(Violation("no-rows", "dataset has no rows"))
    m = dataset.n_features
    t = len(times)
    seen: dict[tuple[str, int], int] = {}
    for i, row in enumerate(dataset.rows):
        if not 1 <= row.time_index <= t:
            out.append(
                Violation(
                    "unknown-time",
                    f"row {i}: time_index {row.time_index} outside 1..{t}",
                    row=i,
                )
            )
        else:
            key = (row.student, row.time_index)
            if key in seen:
                out.append(
                    Violation(
                        "duplicate-pair",
                        f"row {i}: duplicate (student, time) pair "
                        f"({row.student!r}, {times[row.time_index - 1]}), "
                        f"first seen at row {seen[key]}",
                        row=i,
                    )
                )
            else:
                seen[key] = i
        if len(row.values) != m:
            out.append(
                Violation(
                    "row-length",
                    f"row {i}: expected {m} feature values, got {len(row.values)}",
                    row=i,
                )
            )
            continue
        for fs, v in zip(dataset.schema.features, row.values):
            if v is MISSING:
                if not fs.allow_missing:
                    out.append(
                        Violation(
                            "disallowed-missing",
                            f"row {i}: feature {fs.name!r} does not allow missing values",
                            row=i,
                            feature=fs.name,
                        )
                    )
            elif fs.kind is FeatureKind.NUMERIC:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    out.append(
                        Violation(
                            "kind-mismatch",
                            f"row {i}: feature {fs.name!r} is numeric but holds {v!r}",
                            row=i,
                            feature=fs.name,
                        )
                    )
                elif not math.isfinite(v):
                    out.append(
                        Violation(
                            "non-finite",
                            f"row {i}: feature {fs.name!r} holds non-finite value {v!r}",
                            row=i,
                            feature=fs.name,
                        )
                    )
            else:
                if not isinstance(v, str):
                    out.append(
                        Violation(
                            "kind-mismatch",
                            f"row {i}: feature {fs.name!r} is categorical but holds {v!r}",
                            row=i,
                            feature=fs.name,
                        )
                    )
                elif v == "":
                    out.append(
                        Violation(
                            "empty-category",
                            f"row {i}: feature {fs.name!r} holds an empty category token",
                            row=i,
                            feature=fs.name,
                        )
                    )
    return out


def counts_over_time(dataset: Dataset, subset: Iterable[int]) -> list[int]:
    """Per-time-step row counts for a subset of row indices.

    counts[i] is the number of subset rows at time step i+1; the sum over
    all steps equals the subset size.
    """
    idx = np.asarray(list(subset) if not isinstance(subset, np.ndarray) else subset, dtype=np.intp)
    t = dataset.n_times
    if idx.size == 0:
        return [0] * t
    if idx.min() < 0 or idx.max() >= dataset.n_rows:
        raise ValueError("row index out of range")
    t0 = dataset.time_indices0()[idx]
    return np.bincount(t0, minlength=t).tolist()
