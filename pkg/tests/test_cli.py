"""CLI dispatch: exit codes, CSV round-trips, and output formats."""

import csv
import json
import math

import numpy as np
import pytest

from rankone import cli
from rankone.errors import ConvergenceError
from rankone.groups import complementary, make_group
from rankone.spherical import spherical_fn_many


def _read_csv(path):
    comments, rows = [], []
    with open(path, newline="") as handle:
        for record in csv.reader(line for line in handle if not line.startswith("#")):
            rows.append(record)
    with open(path) as handle:
        comments = [line for line in handle if line.startswith("#")]
    return comments, rows[0], rows[1:]


def test_volume_single_value(capsys):
    assert cli.main(["volume", "--group", "so:3", "--t", "1"]) == 0
    out = capsys.readouterr().out.strip()
    assert out.startswith("0.40671510196175")
    assert float(out) == pytest.approx(0.40671510196175464, rel=1e-12)


def test_missing_required_flag_exits_1(capsys):
    assert cli.main(["mc", "--samples", "10"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_unknown_flag_exits_1(capsys):
    assert cli.main(["sphfn", "--param", "c:0.5", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_subcommand_exits_1(capsys):
    assert cli.main(["frobnicate"]) == 1


def test_bad_param_value_exits_1(capsys):
    assert cli.main(["sphfn", "--param", "q:9"]) == 1
    assert "bad spectral parameter" in capsys.readouterr().err


def test_bad_group_exits_1(capsys):
    assert cli.main(["volume", "--group", "so:1", "--t", "1"]) == 1


def test_verify_rejects_other_groups(capsys):
    assert cli.main(["verify", "--group", "su:4"]) == 1


def test_convergence_failure_exits_2(monkeypatch, capsys):
    def boom(group, t):
        raise ConvergenceError("synthetic")

    monkeypatch.setattr(cli, "ball_volume", boom)
    assert cli.main(["volume", "--group", "so:3", "--t", "1"]) == 2
    assert "convergence" in capsys.readouterr().err


def test_sphfn_csv_round_trip(tmp_path):
    out = tmp_path / "sphfn.csv"
    code = cli.main(
        ["sphfn", "--group", "so:3", "--param", "c:0.5",
         "--t-min", "0.5", "--t-max", "4", "--steps", "8", "--out", str(out)]
    )
    assert code == 0
    comments, header, rows = _read_csv(out)
    assert header == ["t", "phi", "decay_envelope", "asymptote_ratio"]
    assert comments and "rankone" in comments[0] and "sphfn" in comments[0]
    ts = np.linspace(0.5, 4.0, 8)
    expected = spherical_fn_many(make_group("so", 3), complementary(0.5), ts)
    for row, t, phi in zip(rows, ts, expected):
        # every float round-trips exactly through the file
        assert float(row[0]) == t
        assert float(row[1]) == phi


def test_psi_csv_checks(tmp_path):
    out = tmp_path / "psi.csv"
    code = cli.main(
        ["psi", "--group", "so:3", "--param", "c:0.5", "--t-min", "0.5",
         "--t-max", "3", "--steps", "6", "--check-lipschitz",
         "--check-bound", "0.5", "--out", str(out)]
    )
    assert code == 0
    comments, header, rows = _read_csv(out)
    assert header == ["t", "psi", "psi_times_envelope", "bound_ratio"]
    assert any("shell bound verified" in c for c in comments)
    assert any("bound check" in c for c in comments)
    for row in rows:
        assert math.isfinite(float(row[3]))


def test_psi_without_bound_flag_emits_nan(tmp_path):
    out = tmp_path / "psi.csv"
    assert cli.main(
        ["psi", "--param", "c:0.5", "--t-min", "1", "--t-max", "2",
         "--steps", "3", "--out", str(out)]
    ) == 0
    _, _, rows = _read_csv(out)
    assert all(math.isnan(float(row[3])) for row in rows)


def test_simulate_from_config(tmp_path):
    cfg = {
        "group": "so:3",
        "atoms": [1.0, 0.7],
        "r": 0.4,
        "omega": [{"param": "c:0.4", "weight": 1.0}, {"param": "p:1.0", "weight": 1.0}],
        "f": {"atom_norms": [1.0, 1.0], "omega_norms": [1.0, 1.0]},
    }
    spec_path = tmp_path / "spectrum.json"
    spec_path.write_text(json.dumps(cfg))
    out = tmp_path / "report.csv"
    code = cli.main(
        ["simulate", "--spec", str(spec_path), "--t-max", "10",
         "--steps", "10", "--out", str(out)]
    )
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header == ["t", "deviation", "envelope", "ratio", "direction_distance"]
    assert len(rows) == 10
    devs = np.array([float(r[1]) for r in rows])
    assert np.all(np.diff(devs) < 0.0)


def test_simulate_missing_file_exits_1(tmp_path, capsys):
    assert cli.main(["simulate", "--spec", str(tmp_path / "nope.json")]) == 1


def test_mc_single_line_and_append(tmp_path, capsys):
    out = tmp_path / "mc.csv"
    for seed in ("3", "4"):
        code = cli.main(
            ["mc", "--t", "1.5", "--samples", "2000", "--obs", "cusp:2.0",
             "--seed", seed, "--out", str(out)]
        )
        assert code == 0
    printed = capsys.readouterr().out.splitlines()
    assert len(printed) == 2
    assert "estimate=" in printed[0] and "stderr=" in printed[0]
    comments, header, rows = _read_csv(out)
    assert len(comments) == 1  # single metadata line despite two appends
    assert header[:4] == ["t", "samples", "seed", "observable"]
    assert len(rows) == 2
    assert rows[0][2] == "3" and rows[1][2] == "4"


def test_mc_scan_csv(tmp_path):
    out = tmp_path / "scan.csv"
    code = cli.main(
        ["mc-scan", "--t-grid", "1:3:1", "--samples", "5000",
         "--obs", "cusp:2.0", "--seed", "42", "--out", str(out)]
    )
    assert code == 0
    comments, header, rows = _read_csv(out)
    assert header == ["t", "estimate", "stderr", "deviation", "envelope"]
    assert [float(r[0]) for r in rows] == [1.0, 2.0, 3.0]
    target = 3.0 / (2.0 * math.pi)
    for row in rows:
        assert float(row[3]) == pytest.approx(abs(float(row[1]) - target), abs=1e-15)


def test_grid_summability_table(tmp_path):
    out = tmp_path / "grid.csv"
    assert cli.main(
        ["grid", "--delta", "0.5", "--m-max", "12",
         "--enumerate-limit", "12", "--out", str(out)]
    ) == 0
    comments, header, rows = _read_csv(out)
    assert header[0] == "m" and len(rows) == 12
    assert any("cauchy" in c for c in comments)


def test_grid_points_mode(capsys):
    assert cli.main(["grid", "--delta", "0.5", "--m-max", "2", "--points"]) == 0
    out = capsys.readouterr().out
    assert "index,t" in out


def test_json_format(capsys):
    assert cli.main(
        ["sphfn", "--param", "trivial", "--t-min", "1", "--t-max", "2",
         "--steps", "2", "--format", "json"]
    ) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["tool"] == "rankone"
    assert payload["columns"][0] == "t"
    assert payload["rows"][0][1] == 1.0  # trivial phi
    assert "sphfn" in payload["invocation"]


def test_threads_env_override(tmp_path, monkeypatch):
    # env var supplies the default; flag overrides; results identical anyway
    args = ["mc", "--t", "1.0", "--samples", "4000", "--obs", "const", "--seed", "1"]
    monkeypatch.setenv("RANKONE_THREADS", "2")
    assert cli.main(args) == 0
    monkeypatch.setenv("RANKONE_THREADS", "not-a-number")
    assert cli.main(args) == 1
    assert cli.main(args + ["--threads", "1"]) == 0


def test_trivial_param_ratio_is_nan(capsys):
    assert cli.main(
        ["sphfn", "--param", "trivial", "--t-min", "1", "--t-max", "2", "--steps", "2"]
    ) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert lines[1].split(",")[3] == "nan"
