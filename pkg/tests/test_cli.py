import json

import pytest

from escweb import __version__
from escweb.cli import main


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def report(path):
    doc = json.loads(path.read_text())
    assert doc["version"] == __version__ and len(doc["config_digest"]) == 16
    return doc


def test_version_and_defaults(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out
    assert main(["--print-defaults"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["budget"] == 200 and d["m"]["fatou"] == 6


def test_render_and_components(in_tmp):
    args = ["render", "--size", "200", "200", "--out", "a.ppm", "--mask-out", "a.npz"]
    assert main(args) == 0
    doc = report(in_tmp / "a.ppm.report.json")
    names = {c["name"]: c["passed"] for c in doc["result"]["checks"]}
    assert names["spiders_web_evidence"] and names["boundary_collar"]
    assert (in_tmp / "a.ppm.json").exists()
    assert main(args[:-4] + ["--out", "b.ppm"]) == 0
    assert (in_tmp / "a.ppm").read_bytes() == (in_tmp / "b.ppm").read_bytes()
    a = report(in_tmp / "a.ppm.report.json")
    b = report(in_tmp / "b.ppm.report.json")
    assert a["result"] == b["result"]
    assert main(["components", "--mask", "a.npz", "--with-loops", "--report", "c.json"]) == 0
    comps = report(in_tmp / "c.json")["result"]["components"]
    assert any("boundary_loop" in c for c in comps)


def test_verify(in_tmp):
    assert main(["verify", "--check", "modulus", "--samples", "2000", "--report", "v.json"]) == 0
    (r,) = report(in_tmp / "v.json")["result"]
    assert r["name"] == "modulus_bounds" and r["details"]["violations"] == 0
    assert main(["verify", "--map", "bergweiler", "--check", "rates", "--check", "cycle",
                 "--report", "b.json"]) == 0
    assert main(["verify", "--m", "5", "--check", "cycle", "--report", "c.json"]) == 1
    assert report(in_tmp / "c.json")["result"][0]["failures"]


def test_verify_same_seed_same_report(in_tmp):
    for name in ("x.json", "y.json"):
        assert main(["verify", "--check", "strips", "--samples", "500", "--seed", "4",
                     "--report", name]) == 0
    assert (in_tmp / "x.json").read_text() == (in_tmp / "y.json").read_text()


def test_trace(in_tmp):
    assert main(["trace", "--m", "1", "--levels", "2", "--report", "t.json"]) == 0
    assert report(in_tmp / "t.json")["result"]["passed"]
    assert main(["trace", "--levels", "3", "--report", "t3.json"]) == 1
    assert report(in_tmp / "t3.json")["result"]["error_type"] == "RangeError"
    assert main(["trace", "--a0", "-5", "--report", "bad.json"]) == 1


def test_classify(in_tmp, capsys):
    assert main(["classify", "--point", "6", "--point", "3.14159265358979i",
                 "--report", "p.json"]) == 0
    rows = report(in_tmp / "p.json")["result"]
    assert [r["outcome"]["class"] for r in rows] == ["MEMBER", "VIOLATED"]
    assert main(["classify", "--fast", "--R", "5", "--point", "0", "--report", "q.json"]) == 0


def test_julia_and_maxmod(in_tmp):
    assert main(["julia", "--size", "40", "30", "--out", "j.ppm"]) == 0
    assert (in_tmp / "j.ppm").read_bytes().startswith(b"P6\n40 30\n255\n")
    assert main(["maxmod", "--r", "1", "--r", "3", "--report", "m.json"]) == 0
    assert main(["maxmod", "--r", "800", "--report", "m2.json"]) == 1


@pytest.mark.parametrize("argv", [
    ["render", "--size", "0", "10"],
    ["render", "--window", "1", "0", "0", "1"],
    ["render", "--map", "custom"],
    ["render", "--map", "custom", "--abcd", "1", "1", "0", "-1"],
    ["classify", "--point", "abc"],
    ["verify", "--budget", "0"],
    ["trace", "--levels", "0"],
    ["maxmod", "--r", "-1"],
])
def test_config_errors_exit_2(argv):
    assert main(argv) == 2


def test_bad_palette(in_tmp):
    (in_tmp / "pal.json").write_text(json.dumps({"MEMBER": [1, 2, 3]}))
    assert main(["render", "--size", "8", "8", "--palette", "pal.json"]) == 2


def test_argparse_errors():
    with pytest.raises(SystemExit) as e:
        main(["render", "--map", "mandelbrot"])
    assert e.value.code == 2
    assert main([]) == 2
