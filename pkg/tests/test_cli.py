import csv
import json

import numpy as np
import pytest

from riemannian_ds import lasa
from riemannian_ds.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    src = root / "raw"
    src.mkdir()
    t = np.linspace(1, 0, 200)[None, :, None]
    rng = np.random.default_rng(4)
    demos = rng.normal(size=(7, 1, 2)) * t + 0.1 * np.sin(6 * t) * t
    lasa.save_euclidean_class(src / "Wave.csv", lasa.EuclideanMotionClass("Wave", demos, 0.01))
    out = root / "riem"
    for man in ("uq", "spd"):
        assert main(["gen-dataset", "--input", str(src), "--manifold", man, "--out", str(out)]) == 0
    return root


def _read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_gen_dataset_writes_files(workspace):
    assert (workspace / "riem" / "Wave_uq.csv").exists()
    assert json.load(open(workspace / "riem" / "Wave_spd.json"))["manifold"] == "spd"


def test_train_and_rollout(workspace):
    model = workspace / "m.json"
    assert main(["train", "--class", str(workspace / "riem" / "Wave_uq.csv"),
                 "--points", "100", "--model-out", str(model)]) == 0
    out = workspace / "roll.csv"
    assert main(["rollout", "--model", str(model), "--start", "0", "--steps", "300", "--out", str(out)]) == 0
    rows = _read(out)
    assert rows[0][2:6] == ["w", "x", "y", "z"] and len(rows) == 301
    assert float(rows[-1][-1]) < 1e-3
    out2 = workspace / "roll2.csv"
    # the first sample of demo 0 in the class file, given as coordinates
    start = ",".join(_read(workspace / "riem" / "Wave_uq.csv")[1][2:6])
    assert main(["rollout", "--model", str(model), "--start", start, "--steps", "300", "--out", str(out2)]) == 0
    assert _read(out2)[1:] == rows[1:]


def test_rollout_with_goal_switch(workspace):
    model = workspace / "s.json"
    assert main(["train", "--class", str(workspace / "riem" / "Wave_spd.csv"),
                 "--points", "100", "--model-out", str(model)]) == 0
    out = workspace / "switch.csv"
    # Mandel coordinates of diag(120, 90)
    assert main(["rollout", "--model", str(model), "--start", "1", "--steps", "400",
                 "--switch-goal", "120,90,0", "--at", "50", "--k-goal", "5", "--out", str(out)]) == 0
    assert float(_read(out)[-1][-1]) < 1e-3


def test_bench(workspace):
    report = workspace / "report.json"
    assert main(["bench", "--dataset", str(workspace / "riem"), "--methods", "rdsl,normalize",
                 "--points", "100", "--report", str(report)]) == 0
    data = json.load(open(report))
    assert {r["method"] for r in data["records"]} == {"rdsl", "normalize"}
    assert main(["bench", "--dataset", str(workspace / "riem"), "--methods", "",
                 "--report", str(report)]) == 0
    assert json.load(open(report))["records"] == []


def test_validation_errors_exit_2(workspace, capsys):
    assert main(["gen-dataset", "--input", str(workspace / "none"), "--manifold", "uq",
                 "--out", str(workspace / "x")]) == 2
    model = workspace / "m.json"
    assert main(["rollout", "--model", str(model), "--start", "99", "--steps", "5"]) == 2
    assert main(["rollout", "--model", str(model), "--start", "0.5,0,0,0", "--steps", "5"]) == 2
    assert main(["rollout", "--model", str(model), "--start", "0", "--steps", "5",
                 "--switch-goal", "1,0,0,0"]) == 2
    assert main(["bench", "--dataset", str(workspace / "none"), "--report", str(workspace / "r")]) == 2
    assert "error:" in capsys.readouterr().err
