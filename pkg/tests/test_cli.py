import csv
import io
import json
import subprocess
import sys

import pytest

from bursty.cli import main


def _corpus(root):
    """Two-label directory corpus with clearly separated vocabularies."""
    words = {
        "sport": ["goal match team score league", "team coach match goal", "score league goal team win"],
        "space": ["orbit rocket launch moon", "rocket moon orbit crew launch", "crew launch orbit planet"],
    }
    for label, docs in words.items():
        (root / label).mkdir(parents=True)
        for k, text in enumerate(docs * 4):
            (root / label / f"{k:02d}.txt").write_text(f"{text} doc{k}")
    return root


def _meta(text):
    first = text.splitlines()[0]
    assert first.startswith("# ")
    return json.loads(first[2:])


def _rows(text):
    return list(csv.DictReader(io.StringIO("\n".join(text.splitlines()[1:]))))


@pytest.fixture
def corpus(tmp_path):
    return _corpus(tmp_path / "corpus")


class TestIngest:
    def test_writes_matrix_and_stats(self, corpus, tmp_path):
        out = tmp_path / "m"
        assert main(["ingest", "--input", str(corpus), "--out", str(out)]) == 0
        for name in ("triplets.txt", "vocab.txt", "docs.tsv", "stats.json"):
            assert (out / name).is_file()
        stats = json.loads((out / "stats.json").read_text())
        assert stats["config"]["d"] == 24

    def test_byte_identical_rerun(self, corpus, tmp_path):
        for name in ("a", "b"):
            main(["ingest", "--input", str(corpus), "--out", str(tmp_path / name)])
        for name in ("triplets.txt", "vocab.txt", "docs.tsv", "stats.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_json_format(self, corpus, tmp_path):
        assert main(["ingest", "--input", str(corpus), "--out", str(tmp_path / "j"), "--format", "json"]) == 0
        assert json.loads((tmp_path / "j" / "matrix.json").read_text())["vocab"]

    def test_reingest_of_output(self, corpus, tmp_path):
        main(["ingest", "--input", str(corpus), "--out", str(tmp_path / "a")])
        assert main(["ingest", "--input", str(tmp_path / "a"), "--out", str(tmp_path / "b")]) == 0
        # the meta line records the input path; the data lines must agree
        a = (tmp_path / "a" / "triplets.txt").read_text().splitlines()[1:]
        b = (tmp_path / "b" / "triplets.txt").read_text().splitlines()[1:]
        assert a == b

    def test_malformed_triplet(self, corpus, tmp_path, capsys):
        out = tmp_path / "m"
        main(["ingest", "--input", str(corpus), "--out", str(out)])
        lines = (out / "triplets.txt").read_text().splitlines()
        bad = 3
        lines[bad - 1] = "0 zero 1"
        (out / "triplets.txt").write_text("\n".join(lines) + "\n")
        assert main(["ingest", "--input", str(out), "--out", str(tmp_path / "x")]) == 2
        assert f"triplets.txt:{bad}:" in capsys.readouterr().err

    def test_missing_input(self, tmp_path, capsys):
        assert main(["ingest", "--input", str(tmp_path / "nope"), "--out", str(tmp_path / "x")]) == 2
        assert "error" in capsys.readouterr().err


class TestWeighFitPlr:
    def test_weigh_lambda_meta(self, corpus, capsys):
        assert main(["weigh", "--input", str(corpus), "--scheme", "sigmoid-lambda", "--sigma2", "2"]) == 0
        text = capsys.readouterr().out
        meta = _meta(text)
        assert meta["scheme"] == "sigmoid_lambda" and meta["mu_arg"] == "auto" and meta["sigma2"] == 2.0
        weights = [float(r["weight"]) for r in _rows(text)]
        assert all(0 < w < 1 for w in weights)

    def test_fit_json(self, corpus, capsys):
        assert main(["fit", "--input", str(corpus), "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["schema"] == "bursty.fits" and doc["terms"]

    def test_plr_sorted_with_sidecar(self, corpus, tmp_path):
        out = tmp_path / "plr.csv"
        assert main(["plr", "--input", str(corpus), "--mu", "4", "--out", str(out)]) == 0
        rows = _rows(out.read_text())
        lam = [float(r["lambda"]) for r in rows if r["excluded"] == ""]
        assert lam == sorted(lam, reverse=True)
        side = _rows((tmp_path / "plr.excluded.csv").read_text())
        assert {r["reason"] for r in side} <= {"precision_nonpositive", "complement_absent"}
        assert len(side) == sum(1 for r in rows if r["excluded"])

    def test_plr_sigma_exceeds_mu(self, corpus, capsys):
        code = main(["plr", "--input", str(corpus), "--mu", "2", "--sigma2", "9"])
        captured = capsys.readouterr()
        assert code == 3
        assert "precision_nonpositive" in captured.err

    def test_plr_bad_penalty(self, corpus):
        assert main(["plr", "--input", str(corpus), "--mu", "-1"]) != 0


class TestSimulateCorrelate:
    def test_simulate_deterministic(self, tmp_path):
        for name in ("a", "b"):
            assert main(["simulate", "--m", "30", "--d", "20", "--seed", "5", "--out", str(tmp_path / name)]) == 0
        for name in ("triplets.txt", "vocab.txt", "config.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_simulate_config_round_trip(self, tmp_path):
        main(["simulate", "--m", "12", "--d", "9", "--seed", "2", "--out", str(tmp_path / "a")])
        main(["simulate", "--config", str(tmp_path / "a" / "config.json"), "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "triplets.txt").read_bytes() == (tmp_path / "b" / "triplets.txt").read_bytes()

    def test_bad_config(self, tmp_path):
        (tmp_path / "c.json").write_text('{"m": 3, "colour": 1}')
        assert main(["simulate", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "o")]) == 2

    def test_correlate_default_setup(self, capsys):
        assert main(["correlate", "--seed", "1", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert 0.85 <= doc["pearson_r"] <= 0.99
        assert doc["config"]["seed"] == 1 and doc["config"]["simulation"]["m"] == 250

    def test_correlate_on_input(self, corpus, capsys):
        assert main(["correlate", "--input", str(corpus)]) == 0
        assert "pearson_r" in _meta(capsys.readouterr().out)


class TestClassify:
    def test_report_csv(self, corpus, capsys):
        assert main(["classify", "--input", str(corpus), "--seed", "3", "--scheme", "tfidf", "--table"]) == 0
        captured = capsys.readouterr()
        rows = {r["class"]: r for r in _rows(captured.out)}
        assert set(rows) == {"space", "sport", "macro avg", "weighted avg", "accuracy"}
        assert float(rows["accuracy"]["f1"]) == 1.0
        assert "weighted avg" in captured.err

    def test_lambda_scheme_echoes_penalty(self, corpus, capsys):
        assert main(["classify", "--input", str(corpus), "--seed", "3", "--mu", "40"]) == 0
        meta = _meta(capsys.readouterr().out)
        assert meta["scheme"] == "sigmoid_lambda" and meta["mu"] == 40.0 and meta["seed"] == 3

    def test_separate_test_collection(self, corpus, tmp_path, capsys):
        test = _corpus(tmp_path / "held")
        assert main(["classify", "--input", str(corpus), "--test", str(test), "--scheme", "tfidf",
                     "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out)["accuracy"] == 1.0

    def test_single_class(self, tmp_path):
        root = tmp_path / "one"
        (root / "only").mkdir(parents=True)
        for k in range(4):
            (root / "only" / f"{k}.txt").write_text(f"alpha beta w{k}")
        assert main(["classify", "--input", str(root)]) == 10

    def test_sensitivity_grid(self, corpus, capsys):
        assert main(["sensitivity", "--input", str(corpus), "--mu-grid", "3,6", "--sigma2-grid", "1,2"]) == 0
        text = capsys.readouterr().out
        assert len(_rows(text)) == 4
        assert "peak_accuracy" in _meta(text)


class TestEntryPoint:
    def test_module_runs(self):
        proc = subprocess.run([sys.executable, "-m", "bursty.cli", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        for cmd in ("ingest", "weigh", "fit", "plr", "simulate", "classify", "sensitivity", "correlate"):
            assert cmd in proc.stdout
