import csv
import json
import subprocess
import sys

import pytest

from costpath.cli import main


@pytest.fixture(scope="module")
def simdir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--n", "200", "--seed", "7", "--out", str(out)]) == 0
    return out


def data_args(d):
    return ["--data", str(d / "data.csv"), "--spec", str(d / "spec.json"), "--threads", "1"]


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_simulate_is_reproducible(tmp_path, simdir):
    assert main(["simulate", "--n", "200", "--seed", "7", "--out", str(tmp_path)]) == 0
    for name in ("data.csv", "spec.json", "costs.csv"):
        assert (tmp_path / name).read_bytes() == (simdir / name).read_bytes()
    assert len(read_csv(simdir / "data.csv")) == 201


def test_select_ecp0_equals_uniform(tmp_path, simdir):
    a, b = tmp_path / "u", tmp_path / "e"
    assert main(["select", *data_args(simdir), "--prior", "uniform", "--out", str(a)]) == 0
    assert main(["select", *data_args(simdir), "--prior", "ecp", "--b", "0", "--out", str(b)]) == 0
    for name in ("models.csv", "pips.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_select_ecp1_equals_fnd(tmp_path, simdir):
    a, b = tmp_path / "f", tmp_path / "e"
    assert main(["select", *data_args(simdir), "--prior", "fnd", "--out", str(a)]) == 0
    assert main(["select", *data_args(simdir), "--prior", "ecp", "--b", "1", "--out", str(b)]) == 0
    assert (a / "models.csv").read_bytes() == (b / "models.csv").read_bytes()
    sa = json.loads((a / "selection_summary.json").read_text())
    sb = json.loads((b / "selection_summary.json").read_text())
    assert sa["map_model"] == sb["map_model"] and sa["median_model"] == sb["median_model"]


def test_select_cleveland_uniform(tmp_path):
    assert main(["select", "--data", "heart", "--prior", "uniform", "--threads", "1", "--out", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "selection_summary.json").read_text())
    assert s["median_model"]["cost_per_obs"] == pytest.approx(381.40, abs=1e-9)
    assert set(s["median_model"]["predictors"]) == {"sex", "chest_pain", "resting_bp", "st_depression",
                                                      "peak_st_segment", "major_vessels", "defect_type"}
    rows = read_csv(tmp_path / "models.csv")
    assert rows[0] == ["model_id", "gamma_bits", "k", "cost_per_obs", "log_prior", "log_marginal", "post_prob"]
    assert len(rows) == 8193


def test_path_single_point(tmp_path, simdir):
    assert main(["path", *data_args(simdir), "--b-grid", "0:0:1", "--no-plots", "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "pips.csv")) == 1 + 9
    assert len(read_csv(tmp_path / "path_summary.csv")) == 2


def test_path_lcp_with_plots(tmp_path, simdir):
    assert main(["path", *data_args(simdir), "--g", "lcp", "--b-grid", "0:0.2:0.02", "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "pips.csv")) == 1 + 11 * 9
    for name in ("path.svg", "cost.svg", "cstat.svg"):
        assert (tmp_path / name).read_text().lstrip().startswith("<?xml")


def test_cv_and_roc(tmp_path, simdir):
    assert main(["cv", *data_args(simdir), "--predictors", "X7,X8,X9", "--seed", "3", "--out", str(tmp_path)]) == 0
    first = (tmp_path / "cv_report.csv").read_bytes()
    assert main(["cv", *data_args(simdir), "--model", "000000111", "--seed", "3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "cv_report.csv").read_bytes() == first
    assert main(["roc", *data_args(simdir), "--predictors", "X7,X8,X9", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "roc.csv")
    assert rows[0] == ["fpr", "tpr"] and rows[1] == ["0", "0"] and rows[-1] == ["1", "1"]


def test_klcurve_small(tmp_path):
    assert main(["klcurve", "--reps", "2", "--n-max", "450", "--no-plots", "--threads", "1",
                 "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "kl_curve.csv")
    assert rows[0] == ["rep", "n", "kl"] and [r[:2] for r in rows[1:]] == [["0", "150"], ["0", "450"],
                                                                            ["1", "150"], ["1", "450"]]


@pytest.mark.parametrize("argv", [
    ["select", "--data", "heart", "--prior", "ecp"],
    ["select", "--data", "heart", "--prior", "fnd", "--b", "0.5"],
    ["path", "--data", "heart", "--b-grid", "0:1"],
    ["select", "--data", "heart", "--threads", "0"],
    ["select"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_pipeline_failure_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("y,a\n3,1\n", encoding="utf-8")
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"response": "y", "predictors": [{"name": "a", "cost": 1}]}), encoding="utf-8")
    assert main(["select", "--data", str(bad), "--spec", str(spec), "--out", str(tmp_path)]) == 1
    assert "response must be 0 or 1" in capsys.readouterr().err


def test_env_threads_and_worker_invariance(tmp_path, simdir, monkeypatch):
    assert main(["select", *data_args(simdir), "--prior", "fnd", "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("COSTPATH_THREADS", "2")
    args = [a for a in data_args(simdir) if a not in ("--threads", "1")]
    assert main(["select", *args, "--prior", "fnd", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "models.csv").read_bytes() == (tmp_path / "b" / "models.csv").read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "costpath", "simulate", "--n", "20", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and (tmp_path / "data.csv").exists()
