"""Divisive recursion: grow a rule hierarchy, assign rows, tally leaves.

All rows start in one cluster. Each cluster is divided by the best-scoring
feasible rule (see :mod:`trendtree.search`); the recursion continues on
both children and stops when no cluster can be split further. The only
mandatory stopping rule is the minimum cluster size; a score floor and a
depth cap are optional extras.

Leaf labels encode the root-to-leaf path: the root cluster is ``C``, the
rule-satisfied child appends ``1`` and the complement appends ``2``, so the
first division yields ``C_1``/``C_2`` and splitting ``C_1`` yields
``C_11``/``C_12``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import Dataset, counts_over_time, validate_dataset
from .objective import ObjectiveSpec, check_objective
from .report import DistributionTable
from .search import CategoryRule, NumericRule, SplitRule, best_split, rule_mask


@dataclass(frozen=True)
class FitConfig:
    min_size: int = 1
    mode: str = "constrained"  # or "reject": maximise unconstrained, then discard
    min_score: float | None = None
    max_depth: int | None = None

    def __post_init__(self):
        if self.min_size < 1:
            raise ValueError("min_size must be >= 1")
        if self.mode not in ("constrained", "reject"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_score is not None and self.min_score < 0:
            raise ValueError("min_score must be >= 0")


@dataclass
class Leaf:
    label: str
    size: int
    count_series: list[int]


@dataclass
class Split:
    rule: SplitRule
    score: float
    size: int
    child_a: "Node"
    child_b: "Node"


Node = Split | Leaf


@dataclass
class ClusterTree:
    root: Node

    def leaves(self) -> list[Leaf]:
        """Leaves in depth-first order, rule-satisfied side first."""
        out: list[Leaf] = []

        def walk(node: Node) -> None:
            if isinstance(node, Leaf):
                out.append(node)
            else:
                walk(node.child_a)
                walk(node.child_b)

        walk(self.root)
        return out


def _label(digits: str) -> str:
    return "C" if not digits else "C_" + digits


def _grow(dataset, rows, objective, config, digits, depth, splitter):
    candidate = None
    if config.max_depth is None or depth < config.max_depth:
        candidate = splitter(dataset, rows, objective, config.min_size, config.mode)
    if (
        candidate is not None
        and min(candidate.size_a, candidate.size_b) >= config.min_size
        and (config.min_score is None or candidate.score > config.min_score)
    ):
        mask = rule_mask(dataset, candidate.rule, rows)
        child_a = _grow(dataset, rows[mask], objective, config, digits + "1", depth + 1, splitter)
        child_b = _grow(dataset, rows[~mask], objective, config, digits + "2", depth + 1, splitter)
        return Split(candidate.rule, candidate.score, int(rows.size), child_a, child_b)
    return Leaf(_label(digits), int(rows.size), counts_over_time(dataset, rows))


def fit(
    dataset: Dataset,
    objective: ObjectiveSpec,
    config: FitConfig = FitConfig(),
    threads: int | None = None,
) -> ClusterTree:
    """Fit a cluster hierarchy on a validated dataset.

    Deterministic for fixed dataset and config, including under
    feature-parallel search (``threads``) and row reordering.
    """
    if not dataset.rows:
        raise ValueError("empty dataset")
    violations = validate_dataset(dataset)
    if violations:
        raise ValueError(f"invalid dataset: {violations[0].message}")
    check_objective(objective, dataset.n_times)

    def splitter(ds, rows, obj, min_size, mode):
        return best_split(ds, rows, obj, min_size, mode, threads=threads)

    root_rows = np.arange(dataset.n_rows, dtype=np.intp)
    return ClusterTree(_grow(dataset, root_rows, objective, config, "", 0, splitter))


def assign(tree: ClusterTree, dataset: Dataset) -> list[str]:
    """Leaf label per row, by evaluating the rule path root to leaf."""
    labels = np.empty(dataset.n_rows, dtype=object)

    def walk(node: Node, rows: np.ndarray) -> None:
        if isinstance(node, Leaf):
            labels[rows] = node.label
            return
        mask = rule_mask(dataset, node.rule, rows)
        walk(node.child_a, rows[mask])
        walk(node.child_b, rows[~mask])

    walk(tree.root, np.arange(dataset.n_rows, dtype=np.intp))
    return labels.tolist()


def leaf_distributions(tree: ClusterTree, dataset: Dataset) -> DistributionTable:
    """Per-time-step row counts of every leaf (columns in depth-first order)."""
    leaf_labels = [leaf.label for leaf in tree.leaves()]
    col = {label: j for j, label in enumerate(leaf_labels)}
    counts = np.zeros((dataset.n_times, len(leaf_labels)), dtype=np.int64)
    t0 = dataset.time_indices0()
    for i, label in enumerate(assign(tree, dataset)):
        counts[t0[i], col[label]] += 1
    return DistributionTable(
        times=dataset.times,
        leaves=tuple(leaf_labels),
        counts=tuple(tuple(int(c) for c in row) for row in counts),
    )


def _rule_dict(rule: SplitRule) -> dict:
    if isinstance(rule, NumericRule):
        return {
            "feature": rule.feature,
            "kind": "numeric",
            "threshold": rule.threshold,
            "missing_side": rule.missing_side,
        }
    return {"feature": rule.feature, "kind": "categorical", "category": rule.category}


def _node_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {
            "type": "leaf",
            "label": node.label,
            "size": node.size,
            "count_series": node.count_series,
        }
    return {
        "type": "split",
        "rule": _rule_dict(node.rule),
        "score": node.score,
        "size": node.size,
        "child_a": _node_dict(node.child_a),
        "child_b": _node_dict(node.child_b),
    }


def serialize_tree(tree: ClusterTree) -> str:
    """Canonical JSON text; byte-stable for identical trees."""
    return json.dumps({"format": "trendtree-v1", "root": _node_dict(tree.root)}, indent=2) + "\n"


def _node_from_dict(obj: dict) -> Node:
    if obj["type"] == "leaf":
        return Leaf(obj["label"], int(obj["size"]), [int(c) for c in obj["count_series"]])
    r = obj["rule"]
    if r["kind"] == "numeric":
        rule: SplitRule = NumericRule(r["feature"], float(r["threshold"]), r["missing_side"])
    else:
        rule = CategoryRule(r["feature"], r["category"])
    return Split(
        rule,
        float(obj["score"]),
        int(obj["size"]),
        _node_from_dict(obj["child_a"]),
        _node_from_dict(obj["child_b"]),
    )


def parse_tree(text: str) -> ClusterTree:
    obj = json.loads(text)
    if obj.get("format") != "trendtree-v1":
        raise ValueError(f"unknown tree format: {obj.get('format')!r}")
    return ClusterTree(_node_from_dict(obj["root"]))
