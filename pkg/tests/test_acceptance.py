"""Acceptance suite.

Each criterion is one test that prints a single PASS/FAIL line. Criteria 3-5
stash their fitted trees in _TREES so criterion 6 can audit structure on the
exact trees the earlier criteria produced (pytest runs tests in file order).
"""
import time

import numpy as np

from trendtree import (
    AnomalyAt,
    Dataset,
    DistributionTable,
    FeatureKind,
    FitConfig,
    Leaf,
    NumericRule,
    PlantSpec,
    Split,
    StartEndShift,
    assign,
    best_split,
    correlate,
    counts_over_time,
    eval_f1,
    eval_f2,
    export_distribution,
    fit,
    generate_planted_anomaly,
    generate_planted_shift,
    leaf_distributions,
    oracle_best_split,
    oracle_fit,
    parse_dataset,
    parse_distribution,
    random_dataset,
    rule_mask,
    serialize_dataset,
    serialize_tree,
)

_TREES: list[tuple[object, Dataset, int]] = []  # (tree, dataset, min_size)


def _report(num: int, name: str, ok: bool, extra: str = "") -> None:
    tail = f" ({extra})" if extra else ""
    print(f"[criterion {num}] {name}: {'PASS' if ok else 'FAIL'}{tail}", flush=True)
    assert ok, f"criterion {num} ({name}) failed"


def _shift_spec(seed: int) -> PlantSpec:
    return PlantSpec(
        students=40, times=6, change_time=4, affected_fraction=0.75,
        noise_features=3, seed=seed,
    )


def test_criterion_1_objective_exactness():
    cases_f1 = [([2, 2, 0], 1.0), ([15, 15, 35, 35], 20.0),
                ([0, 10, 20], 10.0), ([4, 4, 4, 4, 4], 0.0)]
    cases_f2 = [(([5, 5, 20, 5, 5], 3), 15.0), (([3, 9, 6], 2), 4.5),
                (([6, 6, 6, 6], 2), 0.0), (([6, 6, 6, 6], 3), 0.0)]
    ok = all(eval_f1(a) == want for a, want in cases_f1)
    ok = ok and all(eval_f2(a, x) == want for (a, x), want in cases_f2)
    t0 = time.perf_counter()
    eval_f1([15, 15, 35, 35])
    eval_f2([5, 5, 20, 5, 5], 3)
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 2e-3  # < 1 ms each
    _report(1, "objective exactness", ok, f"{elapsed * 1e3:.3f} ms for both")


def test_criterion_2_oracle_equivalence_search():
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(1000):
        ds = random_dataset(seed)
        rows = np.arange(ds.n_rows)
        for objective in (StartEndShift(), AnomalyAt(2)):
            for mode in ("constrained", "reject"):
                fast = best_split(ds, rows, objective, 3, mode)
                slow = oracle_best_split(ds, rows, objective, 3, mode)
                if fast is None or slow is None:
                    same = fast is None and slow is None
                else:
                    same = fast.rule == slow.rule and fast.score == slow.score
                if not same:
                    mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 60.0
    _report(2, "oracle equivalence (search)", ok,
            f"1000 datasets x 2 objectives x 2 modes, {elapsed:.1f} s")


def test_criterion_3_oracle_equivalence_tree():
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(200):
        ds = random_dataset(seed)
        config = FitConfig(min_size=4)
        tree = fit(ds, StartEndShift(), config)
        if serialize_tree(tree) != serialize_tree(oracle_fit(ds, StartEndShift(), config)):
            mismatches += 1
        _TREES.append((tree, ds, 4))
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 60.0
    _report(3, "oracle equivalence (tree)", ok, f"200 datasets, {elapsed:.1f} s")


def _recovered(tree, spec: PlantSpec) -> bool:
    root = tree.root
    return (
        isinstance(root, Split)
        and isinstance(root.rule, NumericRule)
        and root.rule.feature == spec.signal_feature
        and spec.band_low[1] <= root.rule.threshold < spec.band_high[0]
        and root.score == float(spec.affected_count)
    )


def test_criterion_4_planted_shift_recovery():
    t0 = time.perf_counter()
    hits = 0
    for seed in range(100):
        spec = _shift_spec(seed)
        ds = generate_planted_shift(spec)
        tree = fit(ds, StartEndShift(), FitConfig(min_size=24))
        hits += _recovered(tree, spec)
        _TREES.append((tree, ds, 24))
    elapsed = time.perf_counter() - t0
    ok = hits >= 95 and elapsed < 30.0
    _report(4, "planted-shift recovery (f1)", ok, f"{hits}/100 seeds, {elapsed:.1f} s")


def test_criterion_5_planted_anomaly_recovery():
    t0 = time.perf_counter()
    hits = 0
    for seed in range(100):
        spec = _shift_spec(seed)
        ds = generate_planted_anomaly(spec)
        tree = fit(ds, AnomalyAt(spec.change_time), FitConfig(min_size=24))
        hits += _recovered(tree, spec)
        _TREES.append((tree, ds, 24))
    elapsed = time.perf_counter() - t0
    ok = hits >= 95 and elapsed < 30.0
    _report(5, "planted-anomaly recovery (f2)", ok, f"{hits}/100 seeds, {elapsed:.1f} s")


def test_criterion_6_size_gate_and_structure():
    assert _TREES, "criteria 3-5 must run first"
    failures = 0
    for tree, ds, min_size in _TREES:
        labels = assign(tree, ds)
        stack = [(tree.root, np.arange(ds.n_rows), 0)]
        labels_seen = []
        while stack:
            node, rows, depth = stack.pop()
            if depth > 0 and node.size < min_size:
                failures += 1
            if isinstance(node, Leaf):
                labels_seen.append(node.label)
                if node.size != rows.size or any(labels[i] != node.label for i in rows):
                    failures += 1
                if node.count_series != counts_over_time(ds, rows):
                    failures += 1
                continue
            mask = rule_mask(ds, node.rule, rows)
            a, b = rows[mask], rows[~mask]
            if node.size != a.size + b.size or node.size != rows.size:
                failures += 1
            stack.append((node.child_b, b, depth + 1))
            stack.append((node.child_a, a, depth + 1))
        for one in labels_seen:
            for other in labels_seen:
                if one != other and other.startswith(one):
                    failures += 1
    _report(6, "size gate & structure", failures == 0,
            f"{len(_TREES)} trees audited")


def test_criterion_7_determinism_and_row_order_invariance():
    rng = np.random.default_rng(1234)
    failures = 0
    for seed in range(20):
        ds = random_dataset(seed)
        perm = rng.permutation(ds.n_rows)
        shuffled = Dataset(ds.schema, ds.times, tuple(ds.rows[i] for i in perm))
        config = FitConfig(min_size=3)
        runs = {
            serialize_tree(fit(d, StartEndShift(), config, threads=threads))
            for d in (ds, ds, shuffled)
            for threads in (1, 8)
        }
        if len(runs) != 1:
            failures += 1
    _report(7, "determinism & row-order invariance", failures == 0, "20 datasets")


def test_criterion_8_scaling_sanity():
    def timed_fit(students: int) -> float:
        spec = PlantSpec(
            students=students, times=20, change_time=10, affected_fraction=0.5,
            noise_features=9, seed=0,
        )
        ds = generate_planted_shift(spec)
        assert ds.n_rows == students * 20
        min_size = ds.n_rows // 100
        t0 = time.perf_counter()
        fit(ds, StartEndShift(), FitConfig(min_size=min_size))
        return time.perf_counter() - t0

    base = timed_fit(5_000)   # n = 1e5 rows, m = 10 features
    double = timed_fit(10_000)  # n = 2e5 rows
    ratio = double / base
    ok = base < 10.0
    _report(8, "scaling sanity", ok,
            f"n=1e5 in {base:.1f} s; doubling ratio {ratio:.2f} (informational, target <= 3)")


def test_criterion_9_invariance_suite():
    rng = np.random.default_rng(99)
    failures = 0
    for ds_seed in range(20):
        ds = random_dataset(ds_seed)
        base_tree = fit(ds, StartEndShift(), FitConfig(min_size=3))
        base_labels = assign(base_tree, ds)
        scale = float(rng.integers(1, 8))
        offset = float(rng.integers(-20, 21))

        def transform(v, j, numeric=frozenset(
                f.name for f in ds.schema.features if f.kind is FeatureKind.NUMERIC)):
            name = ds.schema.features[j].name
            if v is None or name not in numeric:
                return v
            return scale * v + offset

        mapped = Dataset(
            ds.schema, ds.times,
            tuple(
                type(r)(r.student, r.time_index,
                        tuple(transform(v, j) for j, v in enumerate(r.values)))
                for r in ds.rows
            ),
        )
        mapped_tree = fit(mapped, StartEndShift(), FitConfig(min_size=3))
        if assign(mapped_tree, mapped) != base_labels:
            failures += 1
            continue
        pairs = [(base_tree.root, mapped_tree.root)]
        while pairs:
            a, b = pairs.pop()
            if isinstance(a, Split) != isinstance(b, Split):
                failures += 1
                break
            if isinstance(a, Split):
                if isinstance(a.rule, NumericRule):
                    if b.rule.threshold != scale * a.rule.threshold + offset:
                        failures += 1
                        break
                elif a.rule != b.rule:
                    failures += 1
                    break
                pairs += [(a.child_a, b.child_a), (a.child_b, b.child_b)]
    # f1/f2 shift invariance and constant-series zero
    for _ in range(100):
        t = int(rng.integers(3, 8))
        a = rng.integers(0, 40, size=t).tolist()
        k = int(rng.integers(1, 25))
        x = int(rng.integers(2, t))
        if eval_f1(a) != eval_f1([v + k for v in a]):
            failures += 1
        if eval_f2(a, x) != eval_f2([v + k for v in a], x):
            failures += 1
        c = [int(rng.integers(0, 40))] * t
        if eval_f1(c) != 0.0 or eval_f2(c, x) != 0.0:
            failures += 1
    _report(9, "invariance suite", failures == 0,
            "20 affine maps x 20 datasets + objective properties")


def test_criterion_10_round_trips():
    failures = 0
    for seed in range(50):
        ds = random_dataset(seed)
        if parse_dataset(serialize_dataset(ds)) != ds:
            failures += 1
    for seed in range(5):
        ds = generate_planted_shift(_shift_spec(seed))
        table = leaf_distributions(fit(ds, StartEndShift(), FitConfig(min_size=24)), ds)
        if parse_distribution(export_distribution(table)) != table:
            failures += 1
    table = DistributionTable((1, 2, 3), ("C_1", "C_2"), ((3, 1), (0, 0), (2, 2)))
    if parse_distribution(export_distribution(table)) != table:
        failures += 1
    _report(10, "round-trips", failures == 0, "50 datasets + distribution tables")


def test_criterion_11_correlation_utility():
    a = [1.0, 4.0, 2.0, 5.0, 3.0, 6.0]
    r_pos, p_pos = correlate(a, a, permutations=999, seed=7)
    r_neg, p_neg = correlate(a, [-v for v in a], permutations=999, seed=7)
    again = correlate(a, a, permutations=999, seed=7)
    ok = (
        r_pos == 1.0 and r_neg == -1.0
        and 0 < p_pos <= 1 and 0 < p_neg <= 1
        and again == (r_pos, p_pos)
    )
    _report(11, "correlation utility", ok)
