from __future__ import annotations

import json

import pytest

from thetapencil.cli import main
from thetapencil.serialize import SchemaError, from_json, to_json


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["build", "--n", "2", "--m", "2", "--k", "1", "--tau", "0+1i", "--seed", "7", "--out", str(a)],
               capsys)[0] == 0
    assert run(["build", "--seed", "7", "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["schema"] == 1 and doc["dim"] == 6 and not doc["exact"]
    assert [t["label"] for t in doc["tensors"]] == ["c1", "c2"]
    keys = [tuple(e[:3]) for e in doc["tensors"][0]["entries"]]
    assert keys == sorted(keys)


@pytest.mark.parametrize("extra", [[], ["--degenerate", "rational"], ["--degenerate", "trig", "--n", "3"]])
def test_export_import_export_is_byte_identical(tmp_path, capsys, extra):
    a, b, c = (tmp_path / f"{x}.json" for x in "abc")
    assert run(["build", *extra, "--out", str(a)], capsys)[0] == 0
    assert run(["export", "--input", str(a), "--out", str(b)], capsys)[0] == 0
    assert run(["export", "--input", str(b), "--out", str(c)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_exact_entries_are_fraction_strings(tmp_path, capsys):
    a = tmp_path / "r.json"
    run(["build", "--degenerate", "rational", "--out", str(a)], capsys)
    doc = json.loads(a.read_text())
    assert doc["exact"]
    e = doc["tensors"][0]["entries"][0]
    assert isinstance(e[3], str) and "/" in e[3] and e[4] == "0"
    back = from_json(a.read_text())
    assert to_json(back) == a.read_text()


def test_legacy_schema_rejected(tmp_path, capsys):
    a = tmp_path / "a.json"
    run(["build", "--out", str(a)], capsys)
    doc = json.loads(a.read_text())
    doc["schema"] = 0
    with pytest.raises(SchemaError):
        from_json(json.dumps(doc))
    a.write_text(json.dumps(doc))
    code, _, err = run(["import", "--input", str(a)], capsys)
    assert code == 2 and "schema" in err


def test_coprimality_error(capsys):
    code, _, err = run(["build", "--n", "4", "--k", "2"], capsys)
    assert code == 2 and "coprime" in err


def test_bad_tau(capsys):
    code, _, err = run(["build", "--tau", "1+0i"], capsys)
    assert code == 2 and "imaginary" in err


def test_verify_passes_and_perturbation_fails(capsys):
    code, out, _ = run(["verify"], capsys)
    assert code == 0 and "ALL CHECKS PASSED" in out
    code, out, _ = run(["verify", "--perturb", "1e-3"], capsys)
    assert code == 1
    assert any(line.startswith("FAIL") and "jacobi c1" in line for line in out.splitlines())


def test_verify_shift_battery(tmp_path, capsys):
    code, out, _ = run(["verify", "--shift", "q83"], capsys)
    assert code == 0
    rep = tmp_path / "s.json"
    code, _, _ = run(["shift", "q83", "--k1", "1", "--k2", "1", "--family", "b-", "--t1", "1", "--t2", "0.7",
                      "--out", str(rep)], capsys)
    assert code == 0
    body = json.loads(rep.read_text())
    assert body["ideal_dims"] == [3, 3] and body["ok"]


def test_profile_environment(monkeypatch, capsys):
    monkeypatch.setenv("THETAPENCIL_TOLERANCE", "strict")
    code, out, _ = run(["verify", "--degenerate", "trig"], capsys)
    assert "tolerance profile: strict" in out and code == 0
    monkeypatch.setenv("THETAPENCIL_TOLERANCE", "nonsense")
    assert run(["verify", "--degenerate", "trig"], capsys)[0] == 2
