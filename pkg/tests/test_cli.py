import json

import jsonschema
import pytest

from pconvex import cli
from pconvex.report import jsonable, load_schema


def load(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_verdict_heat_punctured_plane(tmp_path):
    out = tmp_path / "r.json"
    code = cli.main(["verdict", "--op", "heat2", "--domain", "punctured-plane.toml", "--out", str(out),
                     "--formats", "json,csv,svg"])
    assert code == 0
    rep = load(out)
    assert rep["result"]["supports"] == "No"
    assert rep["conventions"]["time_coordinate"].startswith("x1")
    svgs = [p for p in rep["exports"] if p.endswith(".svg")]
    assert svgs
    text = (tmp_path / svgs[0].split("/")[-1]).read_text()
    assert 'version="1.1"' in text
    csv_head = next(p for p in rep["exports"] if p.endswith(".csv"))
    assert open(csv_head).readline().strip() == "x1,x2,d,in_x"


def test_exports_replay(tmp_path, capsys):
    out = tmp_path / "r.json"
    cli.main(["verdict", "--op", "heat2", "--domain", "punctured-plane", "--out", str(out)])
    rep = load(out)
    certs = [p for p in rep["exports"] if p.endswith(".json")]
    assert certs
    for c in certs:
        assert cli.main(["--replay", c]) == 0
    # a tampered certificate fails replay with exit 1
    data = json.loads(open(certs[0]).read())
    data["certificate"]["K"] = data["certificate"]["K"][:1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert cli.main(["--replay", str(bad)]) == 1


def test_classify_elliptic(capsys):
    assert cli.main(["classify", "--op", "x1^2+x2^2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["result"]["elliptic"] is True


def test_sigma_exact_rule(tmp_path):
    out = tmp_path / "s.json"
    assert cli.main(["sigma", "--op", "laplace3-sub", "--V", "e3", "--out", str(out)]) == 0
    res = load(out)["result"]
    assert res["estimate"]["value"] <= 0.05
    assert res["exact"]["sigma_is_zero"] is True


def test_sigma_config_file(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('op = "laplace3-sub"\nV = "e1"\nseed = 9\n[sigma]\nt_grid = [1, 2]\nradii = [10, 100]\n'
                   'directions = 20\n')
    out = tmp_path / "s.json"
    assert cli.main(["sigma", "--config", str(cfg), "--out", str(out)]) == 0
    rep = load(out)
    assert rep["seed"] == 9
    assert rep["result"]["params"]["radii"] == [10.0, 100.0]
    assert rep["result"]["exact"]["sigma_is_zero"] is False


def test_minprinciple_command(tmp_path):
    out = tmp_path / "m.json"
    code = cli.main(["minprinciple", "--domain", "punctured-space3", "--W", "e1,e2",
                     "--offsets", "0,0,0.25;0,0,0.5;0,0,1", "--out", str(out)])
    assert code == 0
    res = load(out)["result"]
    assert res["status"] == "fails" and len(res["certificates"]) == 3


def test_canonical_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a" / "r.json", tmp_path / "b" / "r.json"
    for p in (a, b):
        assert cli.main(["augmented", "--op", "heat2", "--domain", "unit-disk", "--out", str(p),
                         "--canonical", "--seed", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "timings" not in load(a)


def test_reports_revalidate(tmp_path):
    out = tmp_path / "r.json"
    cli.main(["verdict", "--op", "laplace3-sub", "--domain", "punctured-space3", "--out", str(out)])
    rep = load(out)
    jsonschema.validate(rep, load_schema())
    assert json.loads(json.dumps(jsonable(rep), sort_keys=True)) == rep
    assert list(rep) == sorted(rep)


def test_presets_lists_domains(capsys):
    assert cli.main(["presets"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert "punctured-plane" in rep["result"]["domains"]
    assert "heatN" in rep["result"]["operators"]


@pytest.mark.parametrize("argv", [
    ["classify", "--op", "x1^^2"],
    ["classify", "--op", "nonsense"],
    ["classify"],
    ["verdict", "--op", "heat2", "--domain", "no-such-domain"],
    ["verdict", "--op", "heat2", "--domain", "punctured-space3"],
    ["verdict", "--op", "heat2", "--domain", "unit-disk", "--h", "-1"],
    ["verdict", "--op", "heat2", "--domain", "unit-disk", "--formats", "png"],
    ["sigma", "--op", "heat2"],
    [],
])
def test_config_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2


def test_unreadable_config(tmp_path):
    bad = tmp_path / "c.toml"
    bad.write_text("op = [unclosed")
    assert cli.main(["classify", "--config", str(bad)]) == 2
    assert cli.main(["classify", "--config", str(tmp_path / "missing.toml")]) == 2


def test_tolerance_refusal_exit_3(tmp_path, monkeypatch):
    # a family that only sees window-frontier components cannot decide
    from pconvex.geometry import Inconclusive
    from pconvex.geometry.slices import FamilyReport

    def fake_family(*a, **k):
        return FamilyReport(Inconclusive("forced", 0.05))

    monkeypatch.setattr(cli, "min_principle_family", fake_family)
    out = tmp_path / "m.json"
    assert cli.main(["minprinciple", "--domain", "unit-disk", "--W", "e1", "--out", str(out)]) == 3
    assert load(out)["exit_code"] == 3
