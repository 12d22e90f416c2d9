import csv
import io
import json
import shutil

import pytest

from pvaudit import dataset as dio
from pvaudit.cli import _bundled_data_dir, main

DATA = _bundled_data_dir()


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


class TestConvert:
    def test_so2_rows(self, capsys):
        rc, out, _ = run(capsys, "convert", "--input", str(DATA / "zheng_so2.csv"))
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rc == 0 and len(rows) == 65
        assert {"p_raw", "p_clamped", "was_clamped"} <= set(rows[0])

    def test_output_file(self, capsys, tmp_path):
        out = tmp_path / "pm.csv"
        rc, _, _ = run(capsys, "convert", "--input", str(DATA / "zheng_pm25.csv"), "--output", str(out))
        assert rc == 0 and len(out.read_text().splitlines()) == 38

    def test_empty_file_is_schema_error(self, capsys, tmp_path):
        f = tmp_path / "empty.csv"
        f.write_text("")
        rc, _, err = run(capsys, "convert", "--input", str(f))
        assert rc == 2 and "schema" in err

    def test_missing_file(self, capsys, tmp_path):
        rc, _, err = run(capsys, "convert", "--input", str(tmp_path / "nope.csv"))
        assert rc == 1 and "nope.csv" in err

    def test_bad_row_reported(self, capsys, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("study_id,first_author,pub_year,subgroup,rr,lcl,ucl\n"
                     "A,x,2000,,1.2,1.1,1.3\nB,x,2000,,1.2,1.3,1.1\n")
        rc, out, err = run(capsys, "convert", "--input", str(f))
        assert rc == 1 and "row" in err
        assert len(out.splitlines()) == 2


class TestAnalysisCommands:
    def test_plot_svg(self, capsys, tmp_path):
        out = tmp_path / "p.svg"
        rc, _, _ = run(capsys, "plot", "--input", str(DATA / "zheng_pm25.csv"), "--out", str(out))
        assert rc == 0 and out.read_text().count("<circle") == 37

    def test_plot_csv_stdout(self, capsys):
        rc, out, _ = run(capsys, "plot", "--input", str(DATA / "schnatter_cml.csv"), "--format", "csv")
        assert rc == 0 and out.splitlines()[0] == "rank,p_raw,p_clamped,study_id"

    def test_classify(self, capsys):
        rc, out, _ = run(capsys, "classify", "--input", str(DATA / "zheng_pm25.csv"))
        assert rc == 0 and json.loads(out)["verdict"] == "BilinearMixture"

    def test_classify_thresholds(self, capsys, tmp_path):
        th = tmp_path / "t.cfg"
        th.write_text("mostly_significant = 0.3\n")
        rc, out, _ = run(capsys, "classify", "--input", str(DATA / "zheng_pm25.csv"), "--thresholds", str(th))
        assert json.loads(out)["verdict"] == "MostlySignificant"

    def test_counts(self, capsys):
        rc, out, _ = run(capsys, "counts", "--input", str(DATA / "zheng_pm25.csv"))
        d = json.loads(out)
        assert d["label"] == "PM2.5" and d["n"] == 37 and d["n_le_001"] == 8
        assert d["published_comparison"]["n_le_05"]["delta"] == 1

    def test_space(self, capsys, tmp_path):
        out = tmp_path / "s.csv"
        rc, text, _ = run(capsys, "space", "--input", str(DATA / "table3_searchspace.csv"), "--out", str(out))
        d = json.loads(text)
        assert rc == 0 and len(d["studies"]) == 17
        assert d["studies"][0]["expected_false_positives_display"] == "≥ 768"
        assert len(out.read_text().splitlines()) == 18

    def test_predict(self, capsys, tmp_path):
        out = tmp_path / "c.csv"
        rc, _, _ = run(capsys, "predict", "--alpha", "0.05", "--power", "0.8", "--bias", "0.2,0.8",
                       "--grid", "1e-4:1e-1:200", "--out", str(out))
        assert rc == 0 and len(out.read_text().splitlines()) == 401

    def test_predict_bad_grid(self, capsys):
        rc, _, err = run(capsys, "predict", "--grid", "1e-4:1e-1")
        assert rc == 1 and "--grid" in err

    def test_pool(self, capsys):
        rc, out, _ = run(capsys, "pool", "--input", str(DATA / "zheng_pm25.csv"), "--method", "dl")
        d = json.loads(out)
        assert d["method"] == "DerSimonianLaird"
        assert d["published_comparison"]["reported"]["rr"] == 1.023

    def test_simulate_roundtrip(self, capsys, tmp_path):
        out = tmp_path / "sim.csv"
        args = ["simulate", "--scenario", "phacked", "--n", "40", "--tests", "50",
                "--hacked-frac", "0.5", "--seed", "42", "--out", str(out)]
        assert run(capsys, *args)[0] == 0
        first = out.read_bytes()
        run(capsys, *args)
        assert out.read_bytes() == first
        assert len(dio.parse_effect_csv(first.decode(), "sim")) == 40

    def test_simulate_config(self, capsys, tmp_path):
        cfg = tmp_path / "s.cfg"
        cfg.write_text("scenario = null\nn_studies = 12\nseed = 1\n")
        rc, out, _ = run(capsys, "simulate", "--config", str(cfg))
        assert rc == 0 and len(out.splitlines()) == 13


class TestReport:
    def test_bundled(self, capsys, tmp_path):
        rc, _, _ = run(capsys, "report", "--out", str(tmp_path))
        rep = json.loads((tmp_path / "report.json").read_text())
        assert rc == 0 and len(rep["datasets"]) == 10
        assert any("PM2.5: n_le_05 computed 15, published 14" in d for d in rep["discrepancies"])
        assert (tmp_path / "plots" / "PM2.5.svg").exists()
        assert (tmp_path / "predictive_curve.csv").exists()

    def test_single_dataset_dir(self, capsys, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        shutil.copy(DATA / "schnatter_cml.csv", data)
        rc, _, _ = run(capsys, "report", "--data", str(data), "--out", str(tmp_path / "out"))
        rep = json.loads((tmp_path / "out" / "report.json").read_text())
        assert rc == 0 and list(rep["datasets"]) == ["CML"]
        assert rep["search_space"] is None

    def test_simulated_null(self, capsys, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        run(capsys, "simulate", "--scenario", "null", "--n", "40", "--seed", "42",
            "--out", str(data / "null_sim.csv"))
        rc, _, _ = run(capsys, "report", "--data", str(data), "--out", str(tmp_path / "out"))
        rep = json.loads((tmp_path / "out" / "report.json").read_text())
        (section,) = rep["datasets"].values()
        assert section["classification"]["verdict"] == "Uniform45"

    def test_bad_file_is_error(self, capsys, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        (data / "junk.csv").write_text("a,b\n1,2\n")
        rc, _, err = run(capsys, "report", "--data", str(data), "--out", str(tmp_path / "out"))
        assert rc == 1 and "junk.csv" in err


def test_requires_subcommand(capsys):
    with pytest.raises(SystemExit):
        main([])
