import json

import numpy as np
import pytest

from conftest import EX2_FIRST, random_design
from sparsenorms.cli import main


def write_csv(path, M):
    M = np.atleast_2d(M)
    path.write_text("\n".join(",".join(f"{x:.17g}" for x in row) for row in M) + "\n")


@pytest.fixture
def workdir(tmp_path):
    write_csv(tmp_path / "ex2a.csv", EX2_FIRST)
    (tmp_path / "l1.json").write_text('{"family": "l1"}')
    (tmp_path / "monotone.json").write_text('{"cone": "monotone"}')
    return tmp_path


def test_norm_subcommand(workdir, capsys):
    rc = main(["norm", "--norm-spec", str(workdir / "l1.json"), "--vector", "3,-4"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["value"] == 7.0


def test_dual_subcommand(workdir, capsys):
    rc = main(["dual", "--norm-spec", str(workdir / "l1.json"), "--vector", "3,-4"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["value"] == 4.0


def test_eigenvalue_subcommand(workdir, capsys):
    rc = main(
        ["eigenvalue", "--matrix", str(workdir / "ex2a.csv"), "--set", "3", "--big-l", "3"]
    )
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["value"] == pytest.approx(2.0 / np.sqrt(26.0), abs=1e-7)
    assert payload["certified"] is True
    assert "wall_clock_seconds" in payload


def test_solve_subcommand(workdir, capsys):
    X = random_design(10, 3, 0)
    Y = X @ np.array([1.0, 0.0, 0.0]) + 0.01
    write_csv(workdir / "x.csv", X)
    write_csv(workdir / "y.csv", Y.reshape(-1, 1))
    rc = main(
        [
            "solve",
            "--matrix", str(workdir / "x.csv"),
            "--y", str(workdir / "y.csv"),
            "--lambda", "0.05",
        ]
    )
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["converged"] is True
    assert payload["kkt_residual"] <= 1e-8


def test_oracle_subcommand(workdir, capsys):
    config = {
        "design": {"synthetic": {"n": 12, "p": 4, "seed": 2}},
        "beta0": [1.0, 0.0, 0.0, 0.0],
        "norm": {"family": "l1"},
        "sigma": 0.4,
        "replicates": 5,
        "seed": 3,
    }
    (workdir / "exp.json").write_text(json.dumps(config))
    out = workdir / "report.jsonl"
    rc = main(["oracle", "--config", str(workdir / "exp.json"), "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    for line in lines:
        rec = json.loads(line)
        assert rec["status"] in ("pass", "inapplicable", "unverifiable")
    assert (workdir / "report.jsonl.summary.csv").exists()


def test_compare_subcommand(workdir, capsys):
    rc = main(
        [
            "compare",
            "--matrix", str(workdir / "ex2a.csv"),
            "--set", "1",
            "--big-l", "2",
            "--cone-spec", str(workdir / "monotone.json"),
        ]
    )
    assert rc == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["l1_ordering_holds"]


def test_bound_subcommand(workdir, capsys):
    rc = main(
        [
            "bound",
            "--matrix", str(workdir / "ex2a.csv"),
            "--cone-spec", str(workdir / "monotone.json"),
            "--draws", "200",
        ]
    )
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] is True
    assert payload["empirical_mean"] <= payload["lambda_eps"]


def test_usage_errors(workdir, capsys):
    assert main(["eigenvalue", "--matrix", "missing.csv", "--set", "1", "--big-l", "1"]) == 1
    err = capsys.readouterr().err
    assert err.startswith("E_")
    assert main(["norm", "--norm-spec", str(workdir / "l1.json"), "--vector", "3,zebra"]) == 1
    # unknown flag rejected by argparse
    assert main(["norm", "--norm-spec", str(workdir / "l1.json"), "--vector", "1", "--bogus", "x"]) == 1


def test_determinism_identical_output(workdir, capsys):
    argv = ["eigenvalue", "--matrix", str(workdir / "ex2a.csv"), "--set", "3", "--big-l", "3"]
    main(argv)
    first = json.loads(capsys.readouterr().out)
    main(argv)
    second = json.loads(capsys.readouterr().out)
    # everything except the timing field must match bit for bit
    first.pop("wall_clock_seconds")
    second.pop("wall_clock_seconds")
    assert first == second


def test_output_round_trips_through_loader(workdir, capsys):
    # CLI JSON output parses back with the stdlib loader used everywhere
    rc = main(["norm", "--norm-spec", str(workdir / "l1.json"), "--vector", "0.1,0.2,0.3"])
    assert rc == 0
    value = json.loads(capsys.readouterr().out)["value"]
    assert value == 0.1 + 0.2 + 0.3
