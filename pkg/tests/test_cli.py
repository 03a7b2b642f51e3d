import subprocess
import sys

import numpy as np
import pytest

from cvfscreen.cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, main
from cvfscreen.config import ConfigError, Settings, apply_overrides, dump_settings, load_settings, parse_config
from cvfscreen.svm import load_model

from conftest import FS, signal, tone


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "spec.json").write_text(
        '{"duration_s": 4, "classes": {"CR": {"count": 10, "pause_cv": 0.4}, '
        '"MCI": {"count": 10, "pause_cv": 1.0}}}')
    assert main(["synth", "--spec", str(d / "spec.json"), "--seed", "1", "--out", str(d / "corpus")]) == 0
    assert main(["extract", "--manifest", str(d / "corpus" / "manifest.csv"),
                 "--out", str(d / "F.csv")]) == 0
    return d


def test_select_writes_table(workdir):
    assert main(["select", "--features", str(workdir / "F.csv"), "--alpha", "0.05",
                 "--out", str(workdir / "S.tsv")]) == EXIT_OK
    lines = (workdir / "S.tsv").read_text().splitlines()
    assert lines[0] == "feature_name\tF\tp\tretained" and len(lines) == 81


def test_evaluate_reports_and_model(workdir, capsys):
    assert main(["evaluate", "--features", str(workdir / "F.csv"), "--select",
                 "--feature-set", "LF+CFD", "--k", "5", "--seed", "2",
                 "--report", str(workdir / "R.csv"), "--save-model", str(workdir / "m.svm")]) == 0
    out = capsys.readouterr().out
    assert "stage full: 75 features" in out
    rows = (workdir / "R.csv").read_text().splitlines()
    assert rows[0].startswith("stage,feature_set") and len(rows) == 3
    m = load_model(workdir / "m.svm")
    assert m.classes == ("CR", "MCI")
    assert main(["evaluate", "--features", str(workdir / "F.csv"), "--k", "5",
                 "--report", str(workdir / "R.txt")]) == 0
    assert (workdir / "R.txt").read_text().startswith("experiment feature_set=LF+CFD+PE")


def test_reports_are_reproducible(workdir):
    args = ["evaluate", "--features", str(workdir / "F.csv"), "--select", "--k", "5", "--seed", "9"]
    main(args + ["--report", str(workdir / "a.csv")])
    main(args + ["--report", str(workdir / "b.csv")])
    assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()


def test_segments_prints_table(tmp_path, capsys):
    from cvfscreen.signal_io import write_wav
    write_wav(tmp_path / "t.wav", signal(np.concatenate([tone(200, 1.0), np.zeros(FS)])))
    assert main(["segments", "--wav", str(tmp_path / "t.wav")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split("\t")[2] for l in lines] == ["voiced", "unvoiced"]


def test_exit_codes(tmp_path, workdir):
    assert main(["extract", "--manifest", str(tmp_path / "none.csv"), "--out", str(tmp_path / "x.csv")]) == EXIT_IO
    (tmp_path / "m.csv").write_text("path,label,subject_id\na.wav,AD,1\n")
    assert main(["extract", "--manifest", str(tmp_path / "m.csv"), "--out", str(tmp_path / "x.csv")]) == EXIT_VALIDATION
    assert main(["select", "--features", str(workdir / "F.csv"), "--alpha", "1.5",
                 "--out", str(tmp_path / "s.tsv")]) == EXIT_VALIDATION
    assert main(["evaluate", "--features", str(workdir / "F.csv"), "--feature-set", "XX",
                 "--report", str(tmp_path / "r.txt")]) == EXIT_VALIDATION
    assert main(["synth", "--spec", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_IO
    assert main([]) == EXIT_VALIDATION
    assert main(["--help"]) == EXIT_OK


def test_print_config_and_overrides(tmp_path, capsys):
    assert main(["--print-config"]) == 0
    text = capsys.readouterr().out
    assert "vad.frame_ms = 25.0" in text and "alpha = 0.05" in text and "nld.pe_orders = 3, 5" in text
    cfg = tmp_path / "c.conf"
    cfg.write_text("# tweak\nvad.hop_ms = 5   # finer hop\nk = 4\nsvm.standardize = false\n")
    assert main(["--config", str(cfg), "--print-config"]) == 0
    text = capsys.readouterr().out
    assert "vad.hop_ms = 5.0" in text and "k = 4" in text and "svm.standardize = false" in text
    cfg.write_text("vad.nope = 1\n")
    assert main(["--config", str(cfg), "--print-config"]) == EXIT_VALIDATION
    assert main(["--config", str(tmp_path / "absent.conf"), "--print-config"]) == EXIT_IO


def test_config_round_trip():
    s = apply_overrides(Settings(), [("nld.pe_orders", "4, 6"), ("alpha", "0.01"), ("svm.kernel", "rbf")])
    assert s.nld.pe_orders == (4, 6) and s.alpha == 0.01 and s.svm.kernel == "rbf"
    again = apply_overrides(Settings(), parse_config(dump_settings(s)))
    assert again == s


def test_config_errors():
    with pytest.raises(ConfigError, match=":1:"):
        parse_config("frame_ms 25\n")
    with pytest.raises(ConfigError, match="bad value"):
        apply_overrides(Settings(), [("k", "ten")])
    with pytest.raises(ConfigError, match="bad value"):
        apply_overrides(Settings(), [("vad.frame_ms", "5")])
    with pytest.raises(ConfigError, match="unknown"):
        apply_overrides(Settings(), [("svm", "1")])
    assert load_settings(None) == Settings()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cvfscreen", "--print-config"], capture_output=True, text=True)
    assert r.returncode == 0 and "svm.C = 1.0" in r.stdout
