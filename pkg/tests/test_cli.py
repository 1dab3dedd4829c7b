import numpy as np
from click.testing import CliRunner

from trendtree.cli import main


def run(args, **kw):
    return CliRunner().invoke(main, args, **kw)


def test_pipeline_is_byte_reproducible(tmp_path):
    data = tmp_path / "synth.csv"
    synth_args = [
        "synth", "--kind", "shift", "--students", "40", "--times", "6",
        "--change-time", "4", "--fraction", "0.75", "--seed", "7",
        "--out", str(data), "--quiet",
    ]
    assert run(synth_args).exit_code == 0
    truth = (tmp_path / "synth.csv.truth.txt").read_text()
    assert "affected_count: 30" in truth

    def pipeline(tag):
        tree = tmp_path / f"tree{tag}.json"
        dist = tmp_path / f"dist{tag}.csv"
        plot = tmp_path / f"plot{tag}.svg"
        r = run(["fit", "--input", str(data), "--objective", "f1",
                 "--min-size", "24", "--out", str(tree)])
        assert r.exit_code == 0, r.output
        assert "30.0" in r.output
        assert run(["distributions", "--input", str(data), "--tree", str(tree),
                    "--out", str(dist), "--quiet"]).exit_code == 0
        assert run(["plot", "--distributions", str(dist), "--out", str(plot),
                    "--mark", "4", "--quiet"]).exit_code == 0
        return tree.read_bytes(), dist.read_bytes(), plot.read_bytes()

    assert pipeline("a") == pipeline("b")


def test_assign_output(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text(
        "student,time,f\n"
        "a,1,1.0\na,2,1.0\na,3,1.0\n"
        "b,1,2.0\nb,2,2.0\nb,3,2.0\n"
    )
    tree = tmp_path / "t.json"
    assert run(["fit", "--input", str(data), "--objective", "f1",
                "--min-size", "3", "--out", str(tree), "--quiet"]).exit_code == 0
    out = tmp_path / "assign.csv"
    r = run(["assign", "--input", str(data), "--tree", str(tree),
             "--out", str(out), "--quiet"])
    assert r.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "student,time,leaf"
    assert len(lines) == 7


def test_f2_requires_x(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("student,time,f\na,1,1.0\n")
    r = run(["fit", "--input", str(data), "--objective", "f2",
             "--min-size", "1", "--out", str(tmp_path / "t.json")])
    assert r.exit_code == 2
    assert "--x" in r.output


def test_f1_on_two_time_steps_is_data_error(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("student,time,f\na,1,1.0\na,2,2.0\nb,1,1.0\nb,2,2.0\n")
    r = run(["fit", "--input", str(data), "--objective", "f1",
             "--min-size", "1", "--out", str(tmp_path / "t.json")])
    assert r.exit_code == 1
    assert "at least 3 time steps" in r.output


def test_duplicate_rows_are_line_numbered_data_error(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("student,time,f\na,1,1.0\na,1,2.0\n")
    r = run(["fit", "--input", str(data), "--objective", "f1",
             "--min-size", "1", "--out", str(tmp_path / "t.json")])
    assert r.exit_code == 1
    assert "line 3" in r.output


def test_correlate_deterministic(tmp_path):
    rng = np.random.default_rng(8)
    path = tmp_path / "series.csv"
    lines = ["a,b"] + [f"{rng.normal():.6f},{rng.normal():.6f}" for _ in range(20)]
    path.write_text("\n".join(lines) + "\n")
    args = ["correlate", "--input", str(path), "--col-a", "a", "--col-b", "b",
            "--permutations", "999", "--seed", "3"]
    r1, r2 = run(args), run(args)
    assert r1.exit_code == 0
    assert r1.output == r2.output
    assert r1.output.startswith("r=")


def test_check_reports_oracle_agreement():
    r = run(["check", "--datasets", "5", "--seed", "11", "--objective", "f1"])
    assert r.exit_code == 0, r.output
    assert "5/5 datasets match the oracle" in r.output
