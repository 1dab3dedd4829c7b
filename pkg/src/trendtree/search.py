"""Best-division search for one cluster.

Numeric features use the sorted threshold sweep: start with the rule side
empty, advance the threshold through each distinct observed value and move
the tied rows across, re-scoring after every advance. Categorical features
split one category off from the rest. Missing values are handled by running
the numeric sweep twice (missing rows pinned wholly to one side, then the
other) or, for categorical features, as a reserved extra category.

Thresholds are always observed feature values, so chosen partitions are
invariant under strictly increasing transforms of a feature.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, FeatureKind
from .objective import (
    AnomalyAt,
    CustomObjective,
    ObjectiveSpec,
    StartEndShift,
    check_objective,
    eval_objective,
)

#: Relative tolerance for treating two custom-objective scores as equal
#: before tie-breaking. Built-in scores are exact half-integers and are
#: compared exactly.
CUSTOM_SCORE_RTOL = 1e-12


@dataclass(frozen=True)
class NumericRule:
    """Row is on side A iff value <= threshold; missing rows go to missing_side."""

    feature: str
    threshold: float
    missing_side: str = "b"  # "a" or "b"


@dataclass(frozen=True)
class CategoryRule:
    """Row is on side A iff value equals category (missing is modelled as
    the reserved missing token)."""

    feature: str
    category: str


SplitRule = NumericRule | CategoryRule


@dataclass
class SplitCandidate:
    rule: SplitRule
    score: float
    size_a: int
    size_b: int
    counts_a: list[int]
    counts_b: list[int]


def rule_mask(dataset: Dataset, rule: SplitRule, rows: np.ndarray) -> np.ndarray:
    """Boolean side-A membership of ``rows`` under ``rule``."""
    rows = np.asarray(rows, dtype=np.intp)
    if isinstance(rule, NumericRule):
        values, miss = dataset.numeric_column(rule.feature)
        mask = values[rows] <= rule.threshold  # NaN compares False
        if rule.missing_side == "a":
            mask = mask | miss[rows]
        return mask
    col = dataset.categorical_column(rule.feature)
    return col[rows] == rule.category


def _score_gt(spec: ObjectiveSpec, a: float, b: float) -> bool:
    """True iff score ``a`` strictly beats ``b`` under the spec's comparison."""
    if isinstance(spec, CustomObjective):
        if abs(a - b) <= CUSTOM_SCORE_RTOL * max(abs(a), abs(b)):
            return False
    return a > b


def _builtin_sweep_scores(
    spec: ObjectiveSpec, sorted_times: np.ndarray, ks: np.ndarray, n_times: int, pinned: np.ndarray
) -> np.ndarray:
    """Vectorised objective scores at every sweep boundary for f1/f2.

    ``ks`` are the side-A sizes (among non-missing rows) at each distinct
    threshold; ``pinned`` is the per-time count of missing rows already on
    side A. Only the time positions the objective reads are accumulated.
    """
    def cum_at(pos: int) -> np.ndarray:
        return np.cumsum(sorted_times == pos)[ks - 1] + pinned[pos]

    if isinstance(spec, StartEndShift):
        start = cum_at(0) + cum_at(1)
        end = cum_at(n_times - 1) + cum_at(n_times - 2)
        return np.abs(start - end) / 2.0
    assert isinstance(spec, AnomalyAt)
    here = cum_at(spec.x - 1)
    return (np.abs(here - cum_at(spec.x)) + np.abs(here - cum_at(spec.x - 2))) / 2.0


def _custom_sweep_scores(
    spec: CustomObjective,
    sorted_times: np.ndarray,
    ks: np.ndarray,
    parent_counts: np.ndarray,
    pinned: np.ndarray,
) -> np.ndarray:
    """Incremental sweep for custom objectives: each row moves to side A
    exactly once; the evaluator sees both full count series per boundary."""
    counts_a = pinned.astype(np.int64).copy()
    scores = np.empty(ks.size, dtype=np.float64)
    pos = 0
    moves = 0
    for i, k in enumerate(ks):
        for r in range(pos, k):
            counts_a[sorted_times[r]] += 1
            moves += 1
        pos = int(k)
        counts_b = parent_counts - counts_a
        scores[i] = eval_objective(spec, counts_a.tolist(), counts_b.tolist())
    assert moves == sorted_times.size
    return scores


def best_split_numeric(
    dataset: Dataset,
    cluster: Sequence[int] | np.ndarray,
    feature: str,
    objective: ObjectiveSpec,
    min_size: int,
    mode: str = "constrained",
) -> SplitCandidate | None:
    """Best threshold rule on one numeric feature, or None if none is feasible.

    In ``constrained`` mode only candidates with both sides >= min_size are
    considered; in ``reject`` mode the unconstrained maximum is returned and
    the caller decides whether to discard it. Candidates with an empty side
    are never returned in either mode.
    """
    cluster = np.asarray(cluster, dtype=np.intp)
    if cluster.size == 0:
        raise ValueError("cluster is empty")
    check_objective(objective, dataset.n_times)
    values, miss = dataset.numeric_column(feature)
    m = miss[cluster]
    t0 = dataset.time_indices0()[cluster]
    n_times = dataset.n_times
    n_miss = int(m.sum())
    n_total = cluster.size
    if n_miss == n_total:
        return None

    # cluster rows in ascending feature order, via the presorted column
    # (missing/NaN rows sort last and are trimmed off)
    member = np.zeros(dataset.n_rows, dtype=bool)
    member[cluster] = True
    order = dataset.numeric_order(feature)
    sel = order[member[order]]
    if n_miss:
        sel = sel[: sel.size - n_miss]
    sv = values[sel]
    st = dataset.time_indices0()[sel]
    ks = np.flatnonzero(np.diff(sv) != 0) + 1
    ks = np.append(ks, sv.size).astype(np.intp)
    thresholds = sv[ks - 1]
    parent_counts = np.bincount(t0, minlength=n_times).astype(np.int64)
    miss_counts = (
        np.bincount(t0[m], minlength=n_times).astype(np.int64)
        if n_miss
        else np.zeros(n_times, dtype=np.int64)
    )
    zeros = np.zeros(n_times, dtype=np.int64)

    best: tuple[float, float, str, int] | None = None  # score, threshold, side, k
    for side in ("a", "b") if n_miss else ("b",):
        pinned = miss_counts if side == "a" else zeros
        size_a = ks + (n_miss if side == "a" else 0)
        size_b = n_total - size_a
        valid = (size_a > 0) & (size_b > 0)
        if mode == "constrained":
            valid &= (size_a >= min_size) & (size_b >= min_size)
        if not valid.any():
            continue
        if isinstance(objective, CustomObjective):
            scores = _custom_sweep_scores(objective, st, ks, parent_counts, pinned)
            pick = None
            for i in np.flatnonzero(valid):
                if pick is None or _score_gt(objective, scores[i], scores[pick]):
                    pick = int(i)
        else:
            scores = _builtin_sweep_scores(objective, st, ks, n_times, pinned)
            pick = int(np.argmax(np.where(valid, scores, -np.inf)))
        cand = (float(scores[pick]), float(thresholds[pick]), side, int(ks[pick]))
        best = _prefer_numeric(objective, cand, best)
    if best is None:
        return None

    _, threshold, side, k = best
    counts_a = np.bincount(st[:k], minlength=n_times).astype(np.int64)
    if side == "a":
        counts_a += miss_counts
    counts_b = parent_counts - counts_a
    if isinstance(objective, CustomObjective):
        # the sweep already evaluated the custom fn on these exact counts;
        # re-calling it would break its single-pass contract
        score = best[0]
    else:
        score = eval_objective(objective, counts_a.tolist(), counts_b.tolist())
    size_a = int(counts_a.sum())
    return SplitCandidate(
        rule=NumericRule(feature, threshold, side),
        score=score,
        size_a=size_a,
        size_b=n_total - size_a,
        counts_a=counts_a.tolist(),
        counts_b=counts_b.tolist(),
    )


def _prefer_numeric(objective, cand, best):
    """Deterministic choice between per-pass numeric winners: higher score,
    then smaller threshold, then missing side A before B (pass order)."""
    if best is None:
        return cand
    if _score_gt(objective, cand[0], best[0]):
        return cand
    if _score_gt(objective, best[0], cand[0]):
        return best
    if cand[1] < best[1]:
        return cand
    return best


def best_split_categorical(
    dataset: Dataset,
    cluster: Sequence[int] | np.ndarray,
    feature: str,
    objective: ObjectiveSpec,
    min_size: int,
    mode: str = "constrained",
) -> SplitCandidate | None:
    """Best single-category split-off on one categorical feature, or None.

    Every observed category (including the reserved missing token when
    missing values are present) is a candidate; ties go to the
    lexicographically earlier category.
    """
    cluster = np.asarray(cluster, dtype=np.intp)
    if cluster.size == 0:
        raise ValueError("cluster is empty")
    check_objective(objective, dataset.n_times)
    col = dataset.categorical_column(feature)[cluster]
    t0 = dataset.time_indices0()[cluster]
    n_times = dataset.n_times
    n_total = cluster.size
    parent_counts = np.bincount(t0, minlength=n_times).astype(np.int64)

    best: SplitCandidate | None = None
    for category in sorted(set(col.tolist())):
        mask = col == category
        size_a = int(mask.sum())
        size_b = n_total - size_a
        if size_a == 0 or size_b == 0:
            continue
        if mode == "constrained" and (size_a < min_size or size_b < min_size):
            continue
        counts_a = np.bincount(t0[mask], minlength=n_times).astype(np.int64)
        counts_b = parent_counts - counts_a
        score = eval_objective(objective, counts_a.tolist(), counts_b.tolist())
        if best is None or _score_gt(objective, score, best.score):
            best = SplitCandidate(
                rule=CategoryRule(feature, category),
                score=score,
                size_a=size_a,
                size_b=size_b,
                counts_a=counts_a.tolist(),
                counts_b=counts_b.tolist(),
            )
    return best


def _search_feature(dataset, cluster, fs, objective, min_size, mode):
    if fs.kind is FeatureKind.NUMERIC:
        return best_split_numeric(dataset, cluster, fs.name, objective, min_size, mode)
    return best_split_categorical(dataset, cluster, fs.name, objective, min_size, mode)


def best_split(
    dataset: Dataset,
    cluster: Sequence[int] | np.ndarray,
    objective: ObjectiveSpec,
    min_size: int,
    mode: str = "constrained",
    threads: int | None = None,
) -> SplitCandidate | None:
    """Best feasible division of a cluster across all features.

    Ties break deterministically: lower schema feature index first, then
    the per-feature rules (smaller threshold / earlier category, missing
    side A before B). The result is independent of ``threads``.
    """
    if mode not in ("constrained", "reject"):
        raise ValueError(f"unknown mode {mode!r}")
    cluster = np.asarray(cluster, dtype=np.intp)
    features = dataset.schema.features
    if threads and threads > 1 and len(features) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            candidates = list(
                pool.map(
                    lambda fs: _search_feature(dataset, cluster, fs, objective, min_size, mode),
                    features,
                )
            )
    else:
        candidates = [
            _search_feature(dataset, cluster, fs, objective, min_size, mode)
            for fs in features
        ]
    best = None
    for cand in candidates:  # schema order: earlier feature wins ties
        if cand is None:
            continue
        if best is None or _score_gt(objective, cand.score, best.score):
            best = cand
    return best
