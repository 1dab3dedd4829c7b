"""Command line interface.

Exit codes: 0 success, 1 data/validation error, 2 flag misuse. All outputs
are byte-deterministic for identical inputs and flags.
"""
from __future__ import annotations

import csv
import io
import sys

import click

from .ingest import IngestError, parse_dataset
from .objective import AnomalyAt, ObjectiveUndefinedError, StartEndShift
from .report import (
    correlate,
    emit_plot,
    export_distribution,
    parse_distribution,
    render_rules,
    serialize_dataset,
)
from .synth import (
    PlantSpec,
    generate_planted_anomaly,
    generate_planted_shift,
    oracle_fit,
    random_dataset,
)
from .tree import FitConfig, assign, fit, leaf_distributions, parse_tree, serialize_tree


def _build_objective(name: str, x: int | None):
    if name == "f1":
        if x is not None:
            raise click.UsageError("--x is only valid with --objective f2")
        return StartEndShift()
    if x is None:
        raise click.UsageError("--objective f2 requires --x <time step>")
    return AnomalyAt(x)


def _load_dataset(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_dataset(fh)
    except (OSError, IngestError) as exc:
        raise click.ClickException(str(exc)) from exc


def _load_tree(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_tree(fh.read())
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise click.ClickException(str(exc)) from exc


@click.group()
def main():
    """Divisive trend clustering of temporal behavioural records."""


@main.command("fit")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--objective", "objective_name", required=True, type=click.Choice(["f1", "f2"]))
@click.option("--x", type=int, default=None, help="Time step of interest (f2 only).")
@click.option("--min-size", required=True, type=int, help="Minimum rows per child cluster.")
@click.option("--mode", type=click.Choice(["constrained", "reject"]), default="constrained")
@click.option("--min-score", type=float, default=None)
@click.option("--max-depth", type=int, default=None)
@click.option("--threads", type=int, default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text")
@click.option("--quiet", is_flag=True)
def run_fit(input_path, objective_name, x, min_size, mode, min_score, max_depth, threads,
            out_path, fmt, quiet):
    """Fit a cluster tree and write its canonical serialization."""
    objective = _build_objective(objective_name, x)
    if min_size < 1:
        raise click.UsageError("--min-size must be >= 1")
    dataset = _load_dataset(input_path)
    config = FitConfig(min_size=min_size, mode=mode, min_score=min_score, max_depth=max_depth)
    try:
        tree = fit(dataset, objective, config, threads=threads)
    except (ObjectiveUndefinedError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    _write(out_path, serialize_tree(tree))
    if not quiet:
        click.echo(render_rules(tree, fmt=fmt), nl=False)


@main.command("assign")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--tree", "tree_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--quiet", is_flag=True)
def run_assign(input_path, tree_path, out_path, quiet):
    """Label every row of a dataset with its leaf cluster."""
    dataset = _load_dataset(input_path)
    tree = _load_tree(tree_path)
    try:
        labels = assign(tree, dataset)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["student", "time", "leaf"])
    for row, label in zip(dataset.rows, labels):
        writer.writerow([row.student, dataset.times[row.time_index - 1], label])
    _write(out_path, buf.getvalue())
    if not quiet:
        click.echo(f"assigned {len(labels)} rows to {len(set(labels))} leaves")


@main.command("distributions")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--tree", "tree_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--quiet", is_flag=True)
def run_distributions(input_path, tree_path, out_path, quiet):
    """Write the per-time-step leaf count table."""
    dataset = _load_dataset(input_path)
    tree = _load_tree(tree_path)
    try:
        table = leaf_distributions(tree, dataset)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    _write(out_path, export_distribution(table))
    if not quiet:
        click.echo(f"wrote {len(table.times)} time steps x {len(table.leaves)} leaves")


@main.command("plot")
@click.option("--distributions", "dist_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--mark", type=int, default=None, help="Shade this time step.")
@click.option("--quiet", is_flag=True)
def run_plot(dist_path, out_path, mark, quiet):
    """Render a distribution table as an SVG line plot."""
    try:
        with open(dist_path, "r", encoding="utf-8") as fh:
            table = parse_distribution(fh.read())
        emit_plot(table, out_path, mark=mark)
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    if not quiet:
        click.echo(f"wrote {out_path}")


@main.command("synth")
@click.option("--kind", type=click.Choice(["shift", "anomaly"]), required=True)
@click.option("--students", required=True, type=int)
@click.option("--times", required=True, type=int)
@click.option("--change-time", required=True, type=int,
              help="Shift boundary, or the anomalous step.")
@click.option("--fraction", required=True, type=float)
@click.option("--band-low", nargs=2, type=int, default=(0, 1), show_default=True)
@click.option("--band-high", nargs=2, type=int, default=(2, 3), show_default=True)
@click.option("--signal-feature", default="signal", show_default=True)
@click.option("--noise-features", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--quiet", is_flag=True)
def run_synth(kind, students, times, change_time, fraction, band_low, band_high,
              signal_feature, noise_features, seed, out_path, quiet):
    """Generate a planted-trend dataset plus a ground-truth sidecar."""
    try:
        spec = PlantSpec(
            students=students,
            times=times,
            change_time=change_time,
            affected_fraction=fraction,
            band_low=tuple(band_low),
            band_high=tuple(band_high),
            signal_feature=signal_feature,
            noise_features=noise_features,
            seed=seed,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    generate = generate_planted_shift if kind == "shift" else generate_planted_anomaly
    dataset = generate(spec)
    _write(out_path, serialize_dataset(dataset))
    truth = (
        f"kind: {kind}\n"
        f"signal_feature: {spec.signal_feature}\n"
        f"change_time: {spec.change_time}\n"
        f"affected_count: {spec.affected_count}\n"
        f"seed: {spec.seed}\n"
    )
    _write(out_path + ".truth.txt", truth)
    if not quiet:
        click.echo(f"wrote {dataset.n_rows} rows to {out_path}")


@main.command("correlate")
@click.option("--input", "input_path", required=True, type=click.Path(),
              help="Delimited file with a header row.")
@click.option("--col-a", required=True)
@click.option("--col-b", required=True)
@click.option("--permutations", type=int, default=9999, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def run_correlate(input_path, col_a, col_b, permutations, seed):
    """Pearson correlation of two columns with a permutation p-value."""
    try:
        with open(input_path, "r", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [cells for cells in reader if cells]
    except (OSError, StopIteration) as exc:
        raise click.ClickException(f"cannot read {input_path}") from exc
    for col in (col_a, col_b):
        if col not in header:
            raise click.ClickException(f"column {col!r} not in {input_path}")
    ja, jb = header.index(col_a), header.index(col_b)
    try:
        a = [float(cells[ja]) for cells in rows]
        b = [float(cells[jb]) for cells in rows]
        r, p = correlate(a, b, permutations=permutations, seed=seed)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"r={r!r} p={p!r}")


@main.command("check")
@click.option("--datasets", "n_datasets", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--objective", "objective_name", type=click.Choice(["f1", "f2"]), default="f1",
              show_default=True)
@click.option("--x", type=int, default=None)
@click.option("--min-size", type=int, default=2, show_default=True)
@click.option("--quiet", is_flag=True)
def run_check(n_datasets, seed, objective_name, x, min_size, quiet):
    """Compare the optimised fit against the brute-force oracle on random data."""
    objective = _build_objective(objective_name, 2 if objective_name == "f2" and x is None else x)
    mismatches = 0
    for i in range(n_datasets):
        dataset = random_dataset(seed + i)
        config = FitConfig(min_size=min_size)
        fast = serialize_tree(fit(dataset, objective, config))
        slow = serialize_tree(oracle_fit(dataset, objective, config))
        if fast != slow:
            mismatches += 1
            if not quiet:
                click.echo(f"dataset seed={seed + i}: MISMATCH")
        elif not quiet:
            click.echo(f"dataset seed={seed + i}: ok")
    if not quiet:
        click.echo(f"{n_datasets - mismatches}/{n_datasets} datasets match the oracle")
    if mismatches:
        sys.exit(1)


if __name__ == "__main__":
    main()
