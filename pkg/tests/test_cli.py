import json
import subprocess
import sys

import pytest

from quillen_models.cli import main
from quillen_models.selftest import CORPUS_ENV, corpus_dir

CP2 = corpus_dir() / "cp2_filtration.json"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cp2_model(tmp_path, capsys):
    path = tmp_path / "cp2_model.json"
    assert run(capsys, "model", "build", CP2, "--out", path)[0] == 0
    return path


def test_model_build_writes_two_stages(cp2_model):
    data = json.loads(cp2_model.read_text())
    assert data["format_version"] == 1
    assert [s["value"] for s in data["complex"]["stages"]] == ["2", "4"]


def test_barcode_pi_and_h(cp2_model, capsys):
    code, out, _ = run(capsys, "barcode", cp2_model, "pi")
    assert code == 0
    assert out.splitlines()[1:] == ["2,2,inf", "3,2,4", "5,4,inf"]
    code, out, _ = run(capsys, "barcode", cp2_model, "h")
    assert out.splitlines()[1:] == ["0,2,inf", "2,2,inf", "4,4,inf"]
    code, out, _ = run(capsys, "barcode", cp2_model, "pi", "--format", "json")
    assert json.loads(out)["mode"] == "pi"


def test_constant_sphere_barcode(tmp_path, capsys):
    model = tmp_path / "s3.json"
    run(capsys, "model", "build", corpus_dir() / "s3_constant.json", "--out", model)
    assert run(capsys, "barcode", model, "pi")[1].splitlines()[1:] == ["3,1,inf"]


def test_h_barcode_of_free_only_model_is_rejected(tmp_path, capsys):
    model = tmp_path / "free.json"
    run(capsys, "model", "build", corpus_dir() / "cancel_pair.json", "--free-only", "--out", model)
    code, _, err = run(capsys, "barcode", model, "h")
    assert code == 2 and "minimal" in err
    assert run(capsys, "barcode", model, "pi")[0] == 0


def _write(path, rows):
    path.write_text("degree,birth,death\n" + "".join(f"{r}\n" for r in rows))
    return path


def test_distance(tmp_path, capsys):
    a = _write(tmp_path / "a.csv", ["2,2,inf", "3,2,4"])
    b = _write(tmp_path / "b.csv", ["2,3,inf", "3,3,5"])
    c = _write(tmp_path / "c.csv", ["4,0,inf"])
    assert run(capsys, "distance", a, a)[1] == "0\n"
    assert run(capsys, "distance", a, b)[1] == "1\n"
    assert run(capsys, "distance", a, c)[1] == "inf\n"


def test_stability_report(tmp_path, capsys):
    shifted = tmp_path / "cp2_late.json"
    data = json.loads(CP2.read_text())
    for st in data["stages"]:
        st["value"] = str(int(st["value"]) + 1)
    shifted.write_text(json.dumps(data))
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "stability", CP2, shifted, "--shift", "1", "--out", out)
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["distances"]["pi"] == "1" and rep["distances"]["certificate_upper_bound"] == "1"
    # a claimed bound below the true distance is an invariant failure
    code, _, err = run(capsys, "stability", CP2, shifted, "--shift", "1/2")
    assert code == 4 and "pi_le_input_bound" in err
    code, _, _ = run(capsys, "stability", CP2, shifted, "--certificate-delta", "1/2")
    assert code == 2


def test_validation_errors(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text('{"format_version": 1, "name": "x", "stages": []}')
    code, _, err = run(capsys, "model", "build", empty)
    assert code == 2 and "no stages" in err

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"format_version": 1, "name": "x", "stages": [
        {"value": "0", "cells": [{"name": "v", "dimension": 2},
                                 {"name": "w", "dimension": 4, "attach": "[v,,v]"}]}]}))
    code, _, err = run(capsys, "model", "build", bad)
    assert code == 2 and "','" in err

    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"format_version": 1, "stages": [{"value": "0", "cells": '
                     '[{"name": "v", "dimension": "two"}]}]}')
    code, _, err = run(capsys, "model", "build", wrong)
    assert code == 2 and "$.stages[0].cells[0].dimension" in err

    broken = tmp_path / "broken.json"
    broken.write_text('{"format_version": 1,\n "stages": [}')
    code, _, err = run(capsys, "model", "build", broken)
    assert code == 2 and "line 2" in err

    assert run(capsys, "model", "build", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "model", "build", CP2, "--truncation", "2")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_truncation_error_exit_code(tmp_path, capsys):
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"format_version": 1, "name": "big", "stages": [
        {"value": "0", "cells": [{"name": "v", "dimension": 7}]}]}))
    code, _, err = run(capsys, "model", "build", big, "--truncation", "4")
    assert code == 3 and "truncation" in err


def test_selftest_passes_and_is_deterministic(tmp_path, capsys):
    code, out, _ = run(capsys, "selftest", "--out", tmp_path / "a")
    assert code == 0 and out.rstrip().endswith("checks passed")
    assert "FAIL" not in out
    run(capsys, "selftest", "--out", tmp_path / "b")
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert files_a == files_b and files_a
    for rel in files_a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_selftest_corpus_override_reports_failures(tmp_path, capsys, monkeypatch):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "bad.json").write_text(json.dumps({"format_version": 1, "name": "bad", "stages": [
        {"value": "0", "cells": [{"name": "a", "dimension": 3}]},
        {"value": "1", "cells": [{"name": "b", "dimension": 4, "attach": "a"},
                                 {"name": "c", "dimension": 5, "attach": "b"}]}]}))
    monkeypatch.setenv(CORPUS_ENV, str(corpus))
    code, out, _ = run(capsys, "selftest")
    assert code == 4
    assert "FAIL  bad: model and d∘d = 0" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "quillen_models", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "selftest" in res.stdout
