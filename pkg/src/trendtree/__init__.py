"""Divisive hierarchical clustering of temporal behavioural records.

Rows of a long-format (student, time, features) table are recursively
divided by decision rules chosen to maximise a time-aware objective; the
result is a hierarchy of rule-defined clusters whose distributions over
time expose behavioural trends.
"""
from .core import (
    MISSING,
    MISSING_CATEGORY,
    Dataset,
    FeatureKind,
    FeatureSpec,
    Row,
    Schema,
    Violation,
    counts_over_time,
    validate_dataset,
)
from .ingest import IngestConfig, IngestError, infer_schema, parse_dataset
from .objective import (
    AnomalyAt,
    CustomObjective,
    ObjectiveSpec,
    ObjectiveUndefinedError,
    StartEndShift,
    eval_f1,
    eval_f2,
    eval_objective,
)
from .report import (
    DistributionTable,
    correlate,
    emit_plot,
    export_distribution,
    parse_distribution,
    render_rules,
    serialize_dataset,
)
from .search import (
    CategoryRule,
    NumericRule,
    SplitCandidate,
    SplitRule,
    best_split,
    best_split_categorical,
    best_split_numeric,
    rule_mask,
)
from .synth import (
    PlantSpec,
    generate_planted_anomaly,
    generate_planted_shift,
    oracle_best_split,
    oracle_fit,
    random_dataset,
)
from .tree import (
    ClusterTree,
    FitConfig,
    Leaf,
    Split,
    assign,
    fit,
    leaf_distributions,
    parse_tree,
    serialize_tree,
)

__version__ = "0.1.0"
