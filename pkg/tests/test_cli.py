import json
import shutil
import subprocess

import numpy as np
import pytest

from heiswhitney import io
from heiswhitney.cli import EXIT_IO, EXIT_OK, EXIT_REJECTED, RunConfig, SchemaError, main
from heiswhitney.suite import circle_lift, vertical_line


@pytest.fixture(scope="module")
def fixtures(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    assert main(["curve-suite", "--out", str(out), "--points", "12", "--m", "2"]) == EXIT_OK
    return out


def test_suite_files(fixtures):
    names = {p.name for p in fixtures.iterdir()}
    for c in ("circle_lift", "cubic_lift", "vertical_line", "tilted_circle", "corner_curve"):
        assert f"{c}.jets.json" in names and f"{c}.samples.json" in names
    obj = io.read_json(fixtures / "circle_lift.jets.json")
    assert obj["m"] == 2 and len(obj["K"]) == 12


def test_validate_rejects_vertical_line(fixtures, tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["validate", str(fixtures / "vertical_line.jets.json"), "--m", "1",
                 "--out", str(out)])
    assert code == EXIT_REJECTED
    assert "condition (3)" in capsys.readouterr().err
    rep = io.read_json(out)
    assert rep["verdict"] == "rejected" and rep["failed_condition"] == 3
    assert rep["av_scan"]["max_ratio"] >= 1e3


def test_validate_accepts_circle(fixtures, tmp_path):
    out = tmp_path / "report.json"
    assert main(["validate", str(fixtures / "circle_lift.jets.json"), "--out", str(out)]) == EXIT_OK
    assert io.read_json(out)["verdict"] == "accepted"


def test_extend_circle_csv(tmp_path):
    jets = tmp_path / "circle.json"
    io.write_json(jets, circle_lift().uniform_jets(9, 2).to_json())
    out = tmp_path / "curve"
    assert main(["extend", str(jets), "--out", str(out), "--resolution", "400"]) == EXIT_OK
    rows = np.loadtxt(tmp_path / "curve.csv", delimiter=",", skiprows=1)
    assert rows.shape[1] == 5 and rows.shape[0] >= 400
    assert np.max(np.abs(rows[:, 4])) < 1e-8
    pieces = io.read_json(tmp_path / "curve.json")["pieces"]
    assert len(pieces) == 8


def test_plot_data_on_empty_input(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert main(["plot-data", str(empty)]) == EXIT_IO
    empty.write_text("{}")
    assert main(["plot-data", str(empty)]) == EXIT_IO
    assert "error:" in capsys.readouterr().err


def test_missing_file_and_bad_options(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == EXIT_IO
    assert main(["extend", str(tmp_path / "nope.json"), "--epsilon", "-1"]) == EXIT_IO
    with pytest.raises(SchemaError):
        RunConfig("lusin", budget=0)


def test_bad_modulus_is_schema_error(fixtures):
    assert main(["validate", str(fixtures / "circle_lift.jets.json"),
                 "--omega", "cubic"]) == EXIT_IO


def test_plot_data_av_series(fixtures, tmp_path):
    out = tmp_path / "av.csv"
    assert main(["plot-data", str(fixtures / "vertical_line.jets.json"), "--m", "1",
                 "--kind", "av", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "gap,ratio"
    assert len(lines) > 2


def test_finiteness_command(fixtures, capsys):
    assert main(["finiteness", str(fixtures / "vertical_line.samples.json"), "--m", "1",
                 "--budget", "200"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["subsets_scanned"] <= 200
    assert rep["M_estimate"] > 100


def test_lusin_command(tmp_path):
    samples = tmp_path / "s.json"
    io.write_json(samples, circle_lift().sample(np.linspace(0, 1, 4097)).to_json())
    out = tmp_path / "lusin"
    assert main(["lusin", str(samples), "--m", "1", "--cells", "40", "--out", str(out)]) == EXIT_OK
    assert io.read_json(tmp_path / "lusin.json")["success"]
    bad = tmp_path / "v.json"
    io.write_json(bad, vertical_line().sample(np.linspace(0, 1, 4097)).to_json())
    assert main(["lusin", str(bad), "--m", "1", "--cells", "40"]) == EXIT_REJECTED


def test_outputs_are_deterministic(fixtures, tmp_path):
    texts = []
    for k in range(2):
        out = tmp_path / f"run{k}.json"
        main(["finiteness", str(fixtures / "tilted_circle.samples.json"), "--m", "2",
              "--out", str(out)])
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


@pytest.mark.skipif(shutil.which("heiswhitney") is None, reason="console script not installed")
def test_console_script(fixtures):
    proc = subprocess.run(["heiswhitney", "validate", str(fixtures / "vertical_line.jets.json"),
                           "--m", "1"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == EXIT_REJECTED
    assert "condition (3)" in proc.stderr
