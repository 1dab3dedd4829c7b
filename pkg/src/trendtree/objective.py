"""Split objectives scoring how a candidate division distributes over time.

An objective maps the per-time-step count series of the two sides of a
candidate division to a score; the search maximises it. Two built-ins are
provided: a start-end shift measure and a single-step anomaly measure.
Custom objectives plug in as plain callables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence


class ObjectiveUndefinedError(ValueError):
    """The objective is not defined for the given series length or parameters."""


@dataclass(frozen=True)
class StartEndShift:
    """Absolute difference between the mean of the first two counts and the
    mean of the last two; large when many rows change side between the
    start and the end of the period. Requires at least 3 time steps."""


@dataclass(frozen=True)
class AnomalyAt:
    """Mean absolute difference between the count at step ``x`` and the
    counts at its two neighbours; large when behaviour at ``x`` stands out.
    ``x`` is 1-based and must satisfy 2 <= x <= T-1."""

    x: int


@dataclass(frozen=True)
class CustomObjective:
    """User-supplied scorer.

    ``fn`` receives both full count series (side A first) and must be a
    pure, deterministic function returning a finite real. No smoothness of
    any kind is required.
    """

    name: str
    fn: Callable[[Sequence[int], Sequence[int]], float]


ObjectiveSpec = StartEndShift | AnomalyAt | CustomObjective


def check_objective(spec: ObjectiveSpec, n_times: int) -> None:
    """Raise ObjectiveUndefinedError if spec cannot be evaluated at this T."""
    if isinstance(spec, StartEndShift) and n_times < 3:
        raise ObjectiveUndefinedError(
            "objective undefined: f1 requires at least 3 time steps"
        )
    if isinstance(spec, AnomalyAt) and not 2 <= spec.x <= n_times - 1:
        raise ObjectiveUndefinedError(
            f"objective undefined: f2 needs 2 <= x <= T-1 (got x={spec.x}, T={n_times})"
        )


def eval_f1(counts_a: Sequence[int]) -> float:
    """Start-end shift score of a count series.

    |(c[1]+c[2])/2 - (c[T]+c[T-1])/2| with 1-based steps; exact half-integer
    for integer counts.
    """
    t = len(counts_a)
    if t < 3:
        raise ObjectiveUndefinedError(
            "objective undefined: f1 requires at least 3 time steps"
        )
    c = counts_a
    return abs((c[0] + c[1]) / 2 - (c[t - 1] + c[t - 2]) / 2)


def eval_f2(counts_a: Sequence[int], x: int) -> float:
    """Local anomaly score at 1-based step ``x``.

    (|c[x]-c[x+1]| + |c[x]-c[x-1]|) / 2; both neighbours must exist.
    """
    t = len(counts_a)
    if not 2 <= x <= t - 1:
        raise ObjectiveUndefinedError(
            f"objective undefined: f2 needs 2 <= x <= T-1 (got x={x}, T={t})"
        )
    c = counts_a
    return (abs(c[x - 1] - c[x]) + abs(c[x - 1] - c[x - 2])) / 2


def eval_objective(
    spec: ObjectiveSpec, counts_a: Sequence[int], counts_b: Sequence[int]
) -> float:
    """Score one candidate division given both sides' count series.

    The two built-ins read only side A (the rule-satisfied side); side B is
    part of the contract for custom objectives.
    """
    if len(counts_a) != len(counts_b):
        raise ValueError(
            f"count series length mismatch: {len(counts_a)} vs {len(counts_b)}"
        )
    if isinstance(spec, StartEndShift):
        return eval_f1(counts_a)
    if isinstance(spec, AnomalyAt):
        return eval_f2(counts_a, spec.x)
    if isinstance(spec, CustomObjective):
        value = float(spec.fn(tuple(counts_a), tuple(counts_b)))
        if not math.isfinite(value):
            raise ValueError(f"custom objective {spec.name!r} returned {value!r}")
        return value
    raise TypeError(f"unknown objective spec: {spec!r}")
