"""Outputs: rule tables, distribution tables, plots, dataset serialization
and a permutation-test correlation utility."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .core import MISSING, MISSING_CATEGORY, Dataset, FeatureKind
from .ingest import IngestConfig
from .search import CategoryRule, NumericRule, SplitRule

if TYPE_CHECKING:
    from .tree import ClusterTree


@dataclass(frozen=True)
class DistributionTable:
    """Row counts per (time step, leaf). Row sums over leaves at each time
    equal the dataset's per-time totals."""

    times: tuple[int, ...]
    leaves: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]  # [T][L]


def _condition(rule: SplitRule, side: str) -> str:
    """Render one side of a rule, losslessly (missing routing included)."""
    if isinstance(rule, NumericRule):
        op = "<=" if side == "a" else ">"
        text = f"{rule.feature} {op} {rule.threshold!r}"
        # a missing value fails both comparisons, so the side that receives
        # missing rows needs an explicit clause for the condition to hold
        if side == rule.missing_side:
            return f"({text} or {rule.feature} is missing)"
        return text
    if rule.category == MISSING_CATEGORY:
        return (
            f"{rule.feature} is missing" if side == "a" else f"{rule.feature} is not missing"
        )
    op = "==" if side == "a" else "!="
    return f"{rule.feature} {op} {rule.category!r}"


def _leaf_rows(tree: "ClusterTree") -> list[tuple[str, int, list[str], list[float]]]:
    rows: list[tuple[str, int, list[str], list[float]]] = []

    def walk(node, conditions: list[str], scores: list[float]) -> None:
        from .tree import Leaf

        if isinstance(node, Leaf):
            rows.append((node.label, node.size, conditions, scores))
            return
        walk(node.child_a, conditions + [_condition(node.rule, "a")], scores + [node.score])
        walk(node.child_b, conditions + [_condition(node.rule, "b")], scores + [node.score])

    walk(tree.root, [], [])
    return rows


def render_rules(tree: "ClusterTree", fmt: str = "text") -> str:
    """One row per leaf: label, size, the conjunction of conditions on the
    root-to-leaf path, and the split score at each level of that path."""
    if fmt not in ("text", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    table = [
        (label, str(size), " AND ".join(conds) if conds else "(all rows)",
         ", ".join(repr(s) for s in scores))
        for label, size, conds, scores in _leaf_rows(tree)
    ]
    header = ("label", "size", "rule", "level scores")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(table)
        return buf.getvalue()
    widths = [max(len(r[j]) for r in [header, *table]) for j in range(4)]
    lines = []
    for r in [header, *table]:
        lines.append("  ".join(r[j].ljust(widths[j]) for j in range(4)).rstrip())
    return "\n".join(lines) + "\n"


def export_distribution(table: DistributionTable, delimiter: str = ",") -> str:
    """Delimited text: header ``time,<leaf labels...>``, one row per time step."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(["time", *table.leaves])
    for time_id, row in zip(table.times, table.counts):
        writer.writerow([time_id, *row])
    return buf.getvalue()


def parse_distribution(text: str, delimiter: str = ",") -> DistributionTable:
    """Inverse of export_distribution."""
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = next(reader)
    if not header or header[0] != "time":
        raise ValueError("expected header starting with 'time'")
    leaves = tuple(header[1:])
    times: list[int] = []
    counts: list[tuple[int, ...]] = []
    for cells in reader:
        if not cells:
            continue
        times.append(int(cells[0]))
        counts.append(tuple(int(c) for c in cells[1:]))
    return DistributionTable(tuple(times), leaves, tuple(counts))


def emit_plot(table: DistributionTable, path: str, mark: int | None = None) -> None:
    """Write an SVG with one polyline per leaf over time.

    Output is byte-deterministic for identical input. ``mark`` shades one
    time step.
    """
    if not table.times or not table.leaves:
        raise ValueError("empty distribution table")
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": "trendtree"}):
        fig, ax = plt.subplots(figsize=(8.0, 4.5))
        if mark is not None:
            ax.axvspan(mark - 0.5, mark + 0.5, color="0.85", zorder=0)
        for j, leaf in enumerate(table.leaves):
            ax.plot(table.times, [row[j] for row in table.counts], marker="o", label=leaf)
        ax.set_xlabel("time step")
        ax.set_ylabel("rows in cluster")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def correlate(
    series_a: Sequence[float],
    series_b: Sequence[float],
    permutations: int = 9999,
    seed: int = 0,
) -> tuple[float, float]:
    """Pearson correlation with a two-sided permutation p-value.

    The identity permutation is always counted, so p is in (0, 1];
    deterministic for a fixed seed.
    """
    a = np.asarray(series_a, dtype=np.float64)
    b = np.asarray(series_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("series must be 1-d and of equal length")
    if a.size < 3:
        raise ValueError("need at least 3 points")
    da = a - a.mean()
    db = b - b.mean()
    sa = float(da @ da)
    sb = float(db @ db)
    if sa == 0 or sb == 0:
        raise ValueError("zero variance in a series")
    # cov / sqrt(var_a * var_b): exactly +/-1 when b is (anti)identical to a,
    # since then db is bitwise (-)da and sqrt(sa * sa) == sa
    den = float(np.sqrt(sa * sb))
    r = float(da @ db) / den
    rng = np.random.Generator(np.random.PCG64(seed))
    hits = 1  # identity permutation
    target = abs(r) - 1e-12
    for _ in range(permutations):
        if abs(float(da @ rng.permutation(db))) / den >= target:
            hits += 1
    return r, hits / (permutations + 1)


def serialize_dataset(dataset: Dataset, config: IngestConfig = IngestConfig()) -> str:
    """Emit the ingest file format; parse_dataset of the result reproduces
    the dataset (shortest-round-trip numeric rendering, missing cells as the
    first missing token)."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=config.delimiter, lineterminator="\n")
    writer.writerow([config.student_column, config.time_column, *dataset.schema.names])
    missing_token = config.missing_tokens[0]
    kinds = [fs.kind for fs in dataset.schema.features]
    for row in dataset.rows:
        cells: list[str] = [row.student, str(dataset.times[row.time_index - 1])]
        for kind, v in zip(kinds, row.values):
            if v is MISSING:
                cells.append(missing_token)
            elif kind is FeatureKind.NUMERIC:
                cells.append(repr(float(v)))
            else:
                cells.append(v)
        writer.writerow(cells)
    return buf.getvalue()
