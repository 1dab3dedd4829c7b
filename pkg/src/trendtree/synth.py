"""Synthetic datasets with planted trends, plus brute-force oracles.

The generators exist to validate trend recovery: they plant a known change
in one signal feature and surround it with trend-free noise features. The
oracles re-solve the split search and the full recursion by exhaustive
enumeration, recomputing every count series from scratch, and are the
ground truth the optimised implementations are checked against.

Randomness comes from numpy's PCG64 generator seeded from the spec, so a
spec fully determines its dataset. Signal values are uniform integers from
the configured bands (so the band boundary is always an observed value and
the ideal threshold sits in the inter-band gap); noise features are
continuous uniform draws on [0, 1), distinct with probability 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Dataset,
    FeatureKind,
    FeatureSpec,
    MISSING,
    Row,
    Schema,
)
from .objective import ObjectiveSpec, check_objective, eval_objective
from .search import CategoryRule, NumericRule, SplitCandidate, _score_gt
from .tree import ClusterTree, FitConfig, _grow


@dataclass(frozen=True)
class PlantSpec:
    """Recipe for a planted-trend dataset.

    ``change_time`` is the first shifted step for shift plants and the
    anomalous step for anomaly plants. ``band_low``/``band_high`` are
    inclusive integer value bands and must be disjoint with a gap.
    """

    students: int
    times: int
    change_time: int
    affected_fraction: float
    band_low: tuple[int, int] = (0, 1)
    band_high: tuple[int, int] = (2, 3)
    signal_feature: str = "signal"
    noise_features: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.students < 1:
            raise ValueError("students must be >= 1")
        if self.times < 3:
            raise ValueError("need at least 3 time steps")
        if not 2 <= self.change_time <= self.times - 1:
            raise ValueError("change_time must be in 2..T-1")
        if not 0 < self.affected_fraction <= 1:
            raise ValueError("affected_fraction must be in (0, 1]")
        lo, hi = self.band_low, self.band_high
        if not (lo[0] <= lo[1] < hi[0] <= hi[1]):
            raise ValueError("bands must be ordered and disjoint with a gap")
        if self.noise_features < 0:
            raise ValueError("noise_features must be >= 0")
        if self.affected_count < 1:
            raise ValueError("affected_fraction too small: no student affected")

    @property
    def affected_count(self) -> int:
        return round(self.students * self.affected_fraction)


def _generate(spec: PlantSpec, high_at) -> Dataset:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    schema = Schema(
        (
            FeatureSpec(spec.signal_feature, FeatureKind.NUMERIC),
            *(
                FeatureSpec(f"noise_{i + 1}", FeatureKind.NUMERIC)
                for i in range(spec.noise_features)
            ),
        )
    )
    affected = spec.affected_count
    rows = []
    for s in range(spec.students):
        student = f"s{s + 1:04d}"
        for t in range(1, spec.times + 1):
            band = spec.band_high if (s < affected and high_at(t)) else spec.band_low
            signal = float(rng.integers(band[0], band[1] + 1))
            noise = rng.uniform(0.0, 1.0, size=spec.noise_features)
            rows.append(Row(student, t, (signal, *map(float, noise))))
    return Dataset(schema, tuple(range(1, spec.times + 1)), tuple(rows))


def generate_planted_shift(spec: PlantSpec) -> Dataset:
    """Affected students' signal moves from the low band to the high band
    at ``change_time`` and stays there; everyone else stays low."""
    return _generate(spec, lambda t: t >= spec.change_time)


def generate_planted_anomaly(spec: PlantSpec) -> Dataset:
    """Affected students' signal sits in the high band only at
    ``change_time``; the ideal split's anomaly score there equals the
    affected-student count."""
    return _generate(spec, lambda t: t == spec.change_time)


def oracle_best_split(
    dataset: Dataset,
    cluster,
    objective: ObjectiveSpec,
    min_size: int,
    mode: str = "constrained",
    max_rows: int = 5000,
) -> SplitCandidate | None:
    """Exhaustive reference search: materialise every candidate division
    (each distinct numeric threshold x missing pinning, each category) and
    recompute both count series from scratch each time.

    Applies the same feasibility and tie-break rules as the optimised
    search; enumeration order realises the tie-break.
    """
    cluster = np.asarray(cluster, dtype=np.intp)
    if cluster.size == 0:
        raise ValueError("cluster is empty")
    if cluster.size > max_rows:
        raise ValueError(f"cluster exceeds oracle bound ({cluster.size} > {max_rows})")
    if mode not in ("constrained", "reject"):
        raise ValueError(f"unknown mode {mode!r}")
    check_objective(objective, dataset.n_times)
    n_times = dataset.n_times
    t0 = dataset.time_indices0()[cluster]
    n_total = cluster.size

    best: SplitCandidate | None = None

    def consider(a_mask: np.ndarray, rule) -> None:
        nonlocal best
        size_a = int(a_mask.sum())
        size_b = n_total - size_a
        if size_a == 0 or size_b == 0:
            return
        if mode == "constrained" and (size_a < min_size or size_b < min_size):
            return
        counts_a = np.bincount(t0[a_mask], minlength=n_times).tolist()
        counts_b = np.bincount(t0[~a_mask], minlength=n_times).tolist()
        score = eval_objective(objective, counts_a, counts_b)
        if best is None or _score_gt(objective, score, best.score):
            best = SplitCandidate(rule, score, size_a, size_b, counts_a, counts_b)

    for fs in dataset.schema.features:
        if fs.kind is FeatureKind.NUMERIC:
            values, miss = dataset.numeric_column(fs.name)
            v = values[cluster]
            m = miss[cluster]
            sides = ("a", "b") if m.any() else ("b",)
            for threshold in sorted(set(v[~m].tolist())):
                for side in sides:
                    a_mask = v <= threshold
                    if side == "a":
                        a_mask = a_mask | m
                    consider(a_mask, NumericRule(fs.name, float(threshold), side))
        else:
            col = dataset.categorical_column(fs.name)[cluster]
            for category in sorted(set(col.tolist())):
                consider(col == category, CategoryRule(fs.name, category))
    return best


def oracle_fit(
    dataset: Dataset,
    objective: ObjectiveSpec,
    config: FitConfig = FitConfig(),
    max_rows: int = 5000,
) -> ClusterTree:
    """Reference recursion: identical to fit but driven by oracle_best_split."""
    from .core import validate_dataset

    if not dataset.rows:
        raise ValueError("empty dataset")
    violations = validate_dataset(dataset)
    if violations:
        raise ValueError(f"invalid dataset: {violations[0].message}")
    check_objective(objective, dataset.n_times)

    def splitter(ds, rows, obj, min_size, mode):
        return oracle_best_split(ds, rows, obj, min_size, mode, max_rows=max_rows)

    root_rows = np.arange(dataset.n_rows, dtype=np.intp)
    return ClusterTree(_grow(dataset, root_rows, objective, config, "", 0, splitter))


def random_dataset(
    seed: int,
    max_students: int = 40,
    max_features: int = 5,
    missing_fraction: float = 0.2,
) -> Dataset:
    """Small randomized mixed-kind dataset for oracle-equivalence testing.

    Numeric features are a mix of small-integer grids (value ties) and
    two-decimal continuous draws; categorical tokens are non-numeric.
    Every time step has at least one row and every feature at least one
    observed value; allow_missing reflects the generated data, so the
    result survives a serialize/parse round-trip unchanged.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n_students = int(rng.integers(2, max_students + 1))
    n_times = int(rng.integers(3, 7))
    n_features = int(rng.integers(1, max_features + 1))

    kinds = [
        FeatureKind.NUMERIC if rng.random() < 0.6 else FeatureKind.CATEGORICAL
        for _ in range(n_features)
    ]
    integer_valued = [bool(rng.random() < 0.7) for _ in range(n_features)]
    may_miss = [bool(rng.random() < 0.4) for _ in range(n_features)]
    tokens = ["p", "q", "r", "w"]
    n_tokens = [int(rng.integers(2, 5)) for _ in range(n_features)]

    rows = []
    for s in range(n_students):
        student = f"s{s + 1:03d}"
        for t in range(1, n_times + 1):
            # student 1 attends every step so no time step is empty
            if s > 0 and rng.random() < 0.1:
                continue
            values = []
            for j in range(n_features):
                if may_miss[j] and rng.random() < missing_fraction:
                    values.append(MISSING)
                elif kinds[j] is FeatureKind.NUMERIC:
                    if integer_valued[j]:
                        values.append(float(rng.integers(0, 5)))
                    else:
                        values.append(round(float(rng.uniform(0, 10)), 2))
                else:
                    values.append(tokens[int(rng.integers(0, n_tokens[j]))])
            rows.append(Row(student, t, tuple(values)))

    # guarantee at least one observed value per feature
    for j in range(n_features):
        if all(r.values[j] is MISSING for r in rows):
            fill = 1.0 if kinds[j] is FeatureKind.NUMERIC else tokens[0]
            old = rows[0]
            vals = list(old.values)
            vals[j] = fill
            rows[0] = Row(old.student, old.time_index, tuple(vals))

    specs = tuple(
        FeatureSpec(
            f"f{j + 1}",
            kinds[j],
            allow_missing=any(r.values[j] is MISSING for r in rows),
        )
        for j in range(n_features)
    )
    return Dataset(Schema(specs), tuple(range(1, n_times + 1)), tuple(rows))
