"""Command-line interface: exit codes, outputs and file artefacts."""

from __future__ import annotations

import json

from gaugefix.cli import main


def test_build_reports_code_parameters(capsys):
    assert main(["build", "--family", "toric", "--L", "2", "--distance"]) == 0
    out = capsys.readouterr().out
    assert "[[12, 2]]" in out and "d_z=2 d_x=2" in out


def test_build_dump_graph(capsys):
    rc = main(["build", "--family", "toric", "--L", "2",
               "--dump-graph", "x", "--p", "0.05"])
    assert rc == 0
    assert "# matching graph basis=x" in capsys.readouterr().out


def test_enumerate_faults_csv(capsys):
    rc = main(["enumerate-faults", "--family", "toric", "--L", "2",
               "--schedule", "ZX", "--rounds", "2", "--p", "0.01"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("mechanism,")
    assert len(lines) > 100


def test_run_writes_csv_and_sidecar(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    rc = main(["run", "--family", "toric", "--L", "2", "--schedule", "ZX",
               "--rounds", "2", "--p", "0.01", "0.02", "--trials", "50",
               "--seed", "3", "--workers", "1", "--output", str(out)])
    assert rc == 0
    text = out.read_text().splitlines()
    assert text[0].split(",")[0] == "family" and len(text) == 3
    sidecar = json.loads((tmp_path / "rows.json").read_text())
    assert sidecar["trials"] == 50


def test_fit_over_written_csv(tmp_path, capsys):
    import csv

    from gaugefix.harness import CSV_COLUMNS

    path = tmp_path / "sweep.csv"
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for L in (8, 16):
            for p in (0.01, 0.02, 0.03):
                rate = 0.2 + (3.0 if L == 8 else 6.0) * (p - 0.02)
                w.writerow({"family": "toric", "L_or_code": L, "l": 1,
                            "schedule": "ZX", "parallelised": 1,
                            "noise": "depolarising", "p": p, "eta": "",
                            "rounds": 1, "trials": 1000,
                            "fail_z": int(rate * 1000), "fail_x": 0,
                            "rate_z": rate, "rate_x": 0.0,
                            "ci_low": 0, "ci_high": 1, "seed": 0,
                            "wall_ms": 1.0})
    assert main(["fit", str(path), "--model", "crossing"]) == 0
    out = capsys.readouterr().out
    assert "0.02" in out


def test_fit_no_crossing_exits_2(tmp_path, capsys):
    import csv

    from gaugefix.harness import CSV_COLUMNS

    path = tmp_path / "flat.csv"
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for L in (8, 16):
            for p in (0.01, 0.02):
                w.writerow({"family": "toric", "L_or_code": L, "l": 1,
                            "schedule": "ZX", "parallelised": 1,
                            "noise": "depolarising", "p": p, "eta": "",
                            "rounds": 1, "trials": 1000,
                            "fail_z": int((0.1 + p + 0.05 * (L == 16)) * 1000),
                            "fail_x": 0,
                            "rate_z": 0.1 + p + 0.05 * (L == 16),
                            "rate_x": 0.0, "ci_low": 0, "ci_high": 1,
                            "seed": 0, "wall_ms": 1.0})
    assert main(["fit", str(path), "--model", "crossing"]) == 2


def test_solve_homomorphisms(capsys):
    assert main(["solve-homomorphisms", "--r", "4", "--s", "4"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,x,y" and "4,1,1" in out


def test_bad_arguments_exit_1(capsys):
    assert main(["run", "--family", "cube", "--p", "0.01"]) == 1
    assert main(["build", "--family", "toric"]) == 1  # missing --L
    assert main(["definitely-not-a-command"]) == 1


def test_missing_csv_exits_2(tmp_path):
    assert main(["fit", str(tmp_path / "nope.csv")]) == 2
