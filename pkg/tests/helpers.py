"""Shared builders for the test suite."""
from __future__ import annotations

import re

from trendtree import (
    MISSING,
    Dataset,
    FeatureKind,
    FeatureSpec,
    Row,
    Schema,
)


def numeric_schema(*names, allow_missing=()):
    return Schema(
        tuple(
            FeatureSpec(n, FeatureKind.NUMERIC, allow_missing=n in allow_missing)
            for n in names
        )
    )


def grid_dataset(values_by_student, times=None, schema=None, feature="f"):
    """Dataset from {student: {time: value}} for a single numeric feature."""
    all_times = sorted({t for v in values_by_student.values() for t in v})
    times = times or all_times
    index = {t: i + 1 for i, t in enumerate(times)}
    rows = []
    for student in sorted(values_by_student):
        for t in sorted(values_by_student[student]):
            rows.append(Row(student, index[t], (values_by_student[student][t],)))
    return Dataset(schema or numeric_schema(feature), tuple(times), tuple(rows))


def make_dataset(feature_specs, row_tuples, times):
    """Dataset from explicit (student, time, values...) tuples.

    feature_specs: list of (name, kind, allow_missing).
    """
    schema = Schema(tuple(FeatureSpec(n, k, m) for n, k, m in feature_specs))
    index = {t: i + 1 for i, t in enumerate(times)}
    rows = tuple(
        Row(student, index[t], tuple(values)) for student, t, *values in row_tuples
    )
    return Dataset(schema, tuple(times), rows)


_COND = re.compile(
    r"^\(?(?P<feat>\w+) (?P<op><=|>|==|!=) (?P<val>.+?)"
    r"(?P<miss> (?:or|and) \w+ is (?:not )?missing)?\)?$"
)


def eval_condition(condition, schema, row):
    """Independent evaluator for render_rules condition strings."""
    if condition == "(all rows)":
        return True
    m = re.match(r"^(\w+) is (not )?missing$", condition)
    if m:
        value = row.values[schema.index_of(m.group(1))]
        return (value is MISSING) != bool(m.group(2))
    m = _COND.match(condition)
    assert m, f"unparsed condition: {condition!r}"
    value = row.values[schema.index_of(m.group("feat"))]
    miss_clause = m.group("miss")
    op = m.group("op")
    if value is MISSING:
        if miss_clause and miss_clause.strip().startswith("or"):
            return True
        # a missing categorical value is the reserved category: it never
        # equals a real category, so != holds and == fails
        return op == "!="

    raw = m.group("val")
    if op in ("<=", ">"):
        ref = float(raw)
        return value <= ref if op == "<=" else value > ref
    ref = raw.strip("'")
    return (value == ref) if op == "==" else (value != ref)
