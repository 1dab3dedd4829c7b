"""Parsing of long-format delimited text into validated datasets.

The file format is UTF-8 delimited text with a header line. Two mandatory
columns identify the student and the (integer) time step; every other
column is a feature. Feature kinds are inferred from the data unless
overridden.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

from .core import (
    MISSING,
    Dataset,
    FeatureKind,
    FeatureSpec,
    Row,
    Schema,
    validate_dataset,
)


class IngestError(ValueError):
    """A parse or validation failure, located by line (and column) where possible."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


@dataclass(frozen=True)
class IngestConfig:
    delimiter: str = ","
    student_column: str = "student"
    time_column: str = "time"
    #: Tokens parsed as missing; exact, case-sensitive matches. The first
    #: one is also what serialization emits for missing cells.
    missing_tokens: tuple[str, ...] = ("", "NA")
    kind_overrides: Mapping[str, FeatureKind] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ValueError("delimiter must be a single character")
        if self.student_column == self.time_column:
            raise ValueError("student_column and time_column must differ")
        if not self.missing_tokens:
            raise ValueError("missing_tokens must not be empty")
        for name in self.kind_overrides:
            if name in (self.student_column, self.time_column):
                raise ValueError(f"kind override on mandatory column {name!r}")


def _parse_numeric(token: str) -> float | None:
    """Parse a locale-independent decimal/scientific literal; None on failure.

    Rejects non-finite spellings and Python's underscore digit grouping.
    """
    if "_" in token:
        return None
    try:
        value = float(token)
    except ValueError:
        return None
    if value != value or value in (float("inf"), float("-inf")):
        return None
    return value


def infer_schema(
    header: Sequence[str],
    rows: Sequence[Sequence[str]],
    config: IngestConfig = IngestConfig(),
) -> Schema:
    """Infer feature kinds and missing-value admissibility from raw cells.

    A feature is numeric iff every non-missing cell parses as a real number;
    overrides in the config take precedence, but overriding to numeric with
    an unparseable cell present is an error.
    """
    header = list(header)
    for mandatory in (config.student_column, config.time_column):
        if mandatory not in header:
            raise IngestError(f"missing mandatory column {mandatory!r}", line=1)
    feature_names = [
        h for h in header if h not in (config.student_column, config.time_column)
    ]
    if not feature_names:
        raise IngestError("no feature columns", line=1)
    if not rows:
        raise IngestError("no data rows")

    missing = set(config.missing_tokens)
    specs = []
    for name in feature_names:
        j = header.index(name)
        cells = [r[j] for r in rows if j < len(r)]
        allow_missing = any(c in missing for c in cells)
        present = [c for c in cells if c not in missing]
        numeric = all(_parse_numeric(c) is not None for c in present)
        override = config.kind_overrides.get(name)
        if override is not None:
            if override is FeatureKind.NUMERIC and not numeric:
                bad = next(c for c in present if _parse_numeric(c) is None)
                raise IngestError(
                    f"override to numeric conflicts with cell {bad!r}", column=name
                )
            kind = override
        else:
            kind = FeatureKind.NUMERIC if numeric else FeatureKind.CATEGORICAL
        specs.append(FeatureSpec(name, kind, allow_missing))
    return Schema(tuple(specs))


def parse_dataset(source: str | IO[str], config: IngestConfig = IngestConfig()) -> Dataset:
    """Parse delimited text into a Dataset that validates cleanly.

    Time identifiers must be integers; they are sorted ascending and
    re-indexed 1..T. Row order in the output matches input order.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream, delimiter=config.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty input, expected a header line", line=1) from None
    raw: list[tuple[int, list[str]]] = []
    for lineno, cells in enumerate(reader, start=2):
        if not cells:
            continue
        if len(cells) != len(header):
            raise IngestError(
                f"expected {len(header)} fields, got {len(cells)}", line=lineno
            )
        raw.append((lineno, cells))

    schema = infer_schema(header, [cells for _, cells in raw], config)
    student_j = header.index(config.student_column)
    time_j = header.index(config.time_column)
    # column position in the file for each schema feature, in schema order
    file_j = {h: j for j, h in enumerate(header)}
    positions = [file_j[name] for name in schema.names]

    missing = set(config.missing_tokens)
    parsed: list[tuple[int, str, int, tuple]] = []
    times_seen: set[int] = set()
    for lineno, cells in raw:
        token = cells[time_j]
        try:
            time_id = int(token)
        except ValueError:
            raise IngestError(
                f"time value {token!r} is not an integer",
                line=lineno,
                column=config.time_column,
            ) from None
        student = cells[student_j]
        values = []
        for fs, j in zip(schema.features, positions):
            cell = cells[j]
            if cell in missing:
                values.append(MISSING)
            elif fs.kind is FeatureKind.NUMERIC:
                value = _parse_numeric(cell)
                if value is None:
                    raise IngestError(
                        f"cell {cell!r} is not numeric", line=lineno, column=fs.name
                    )
                values.append(value)
            else:
                values.append(cell)
        times_seen.add(time_id)
        parsed.append((lineno, student, time_id, tuple(values)))

    times = tuple(sorted(times_seen))
    index_of_time = {t: i + 1 for i, t in enumerate(times)}
    seen_pairs: dict[tuple[str, int], int] = {}
    rows = []
    for lineno, student, time_id, values in parsed:
        key = (student, time_id)
        if key in seen_pairs:
            raise IngestError(
                f"duplicate (student, time) pair ({student!r}, {time_id}), "
                f"first seen at line {seen_pairs[key]}",
                line=lineno,
            )
        seen_pairs[key] = lineno
        rows.append(Row(student, index_of_time[time_id], values))

    dataset = Dataset(schema, times, tuple(rows))
    violations = validate_dataset(dataset)
    if violations:
        raise IngestError("validation failed: " + violations[0].message)
    return dataset
