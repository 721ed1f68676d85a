import json
from fractions import Fraction
import re

import pytest

from toricroof.adelic import ARCH, DivisorSpec, RoofMetric
from toricroof.cli import load_spec, main, spec_from_json, spec_to_json
from toricroof.concave import RoofFn
from toricroof.exactnum import LogValue
from toricroof.geometry import hull

CUBIC = ["build", "subtorus", "--exponents", "1;2;3", "--coords", "1,4,1/3,1/2"]
QUADRIC = ["build", "subtorus", "--exponents", "1,0;0,1;1,1", "--coords", "1,2,4,1"]


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def build_file(capsys, tmp_path, argv, name="d.json"):
    code, out, _ = run(capsys, argv)
    assert code == 0
    path = tmp_path / name
    path.write_text(out)
    return path


FAMILIES = [
    CUBIC,
    QUADRIC,
    ["build", "subtorus-fs", "--exponents", "1;2", "--coords", "1,1/4,1/2"],
    ["build", "canonical", "--simplex", "2"],
    ["build", "lp", "--simplex", "2", "--lam", "3/2"],
    ["build", "lp", "--polytope", "0,0;1,0;0,1;1,1"],
    ["build", "wps", "--simplex", "2", "--c", "1/2,1/2,1/2"],
    ["build", "wps", "--simplex", "1", "--c", "1,2", "--ell=-1:-1;1/2:0"],
    ["build", "bundle", "--n", "1", "--a", "1,2"],
    ["build", "bundle", "--n", "2", "--a", "1"],
    ["build", "hirzebruch", "--a0", "2", "--b", "1"],
    ["build", "prescribe", "--mu", "1,0", "--nu", "3/2"],
]


@pytest.mark.parametrize("argv", FAMILIES, ids=lambda a: "-".join(a[1:4]))
def test_build_round_trip(capsys, tmp_path, argv):
    path = build_file(capsys, tmp_path, argv)
    doc = json.loads(path.read_text())
    assert doc["schema_version"] == 1
    spec = load_spec(str(path))
    again = spec_to_json(spec)
    assert spec_to_json(spec_from_json(again)) == again
    assert {k: v for k, v in again.items()} == {k: v for k, v in doc.items()}


def test_text_and_json_share_exact_strings(capsys, tmp_path):
    path = build_file(capsys, tmp_path, CUBIC)
    _, text, _ = run(capsys, ["minima", str(path)])
    _, js, _ = run(capsys, ["minima", str(path), "--json"])
    doc = json.loads(js)
    assert doc["mu"] == ["7/3·log(2)+1/2·log(3)", "0"]
    for s in doc["mu"]:
        assert f"= {s}  (~" in text
    assert LogValue.parse(doc["mu"][0]) == LogValue.log(2, Fraction(7, 3)) + LogValue.log(3, Fraction(1, 2))
    assert doc["label"] == "certified"


def test_single_index(capsys, tmp_path):
    path = build_file(capsys, tmp_path, QUADRIC)
    code, out, _ = run(capsys, ["minima", str(path), "--i", "1", "--json"])
    assert code == 0 and json.loads(out)["mu"] == "3/2·log(2)"
    assert run(capsys, ["minima", str(path), "--i", "4"])[0] == 3


def test_zhang_and_validate(capsys, tmp_path):
    path = build_file(capsys, tmp_path, CUBIC)
    code, out, _ = run(capsys, ["zhang", str(path), "--json"])
    rep = json.loads(out)
    assert code == 0 and rep["left_holds"] and rep["right_holds"]
    assert run(capsys, ["validate", str(path)])[1].startswith("ok: rank 1")


def test_solve_command(capsys, tmp_path):
    path = build_file(capsys, tmp_path, ["build", "subtorus-fs", "--exponents", "1;2", "--coords", "1,1/4,1/2"])
    code, out, _ = run(capsys, ["solve", str(path), "--json"])
    assert code == 0
    assert abs(json.loads(out)["mu_ess_approx"] - 1.416606672028108) < 1e-8


# -- errors and exit codes -----------------------------------------------------------


def test_malformed_json_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(capsys, ["minima", str(p)])[0] == 2


def test_unknown_field_rejected(capsys, tmp_path):
    path = build_file(capsys, tmp_path, CUBIC)
    doc = json.loads(path.read_text())
    doc["colour"] = "red"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, ["validate", str(path)])
    assert code == 2 and "colour" in err
    doc.pop("colour")
    doc["places"][0]["extra"] = 1
    path.write_text(json.dumps(doc))
    assert run(capsys, ["validate", str(path)])[0] == 2


def test_wrong_schema_version(capsys, tmp_path):
    path = build_file(capsys, tmp_path, CUBIC)
    doc = json.loads(path.read_text())
    doc["schema_version"] = 7
    path.write_text(json.dumps(doc))
    assert run(capsys, ["validate", str(path)])[0] == 2


def test_validation_failure_exit_3(capsys, tmp_path):
    # a roof over the wrong polytope
    spec = DivisorSpec(1, hull([(0,), (2,)]))
    doc = spec_to_json(spec)
    roof = RoofFn([((0,), LogValue()), ((1,), LogValue())])
    doc["places"] = [{"place": "p:4", "weight": "1", "metric": {"roof": roof.to_json()}}]
    p = tmp_path / "v.json"
    p.write_text(json.dumps(doc))
    assert run(capsys, ["validate", str(p)])[0] in (2, 3)


def test_builder_error_exit_3(capsys):
    assert run(capsys, ["build", "prescribe", "--mu", "1,0", "--nu", "2"])[0] == 3
    assert run(capsys, ["build", "bundle", "--n", "1", "--a", "2,1"])[0] == 3


def test_no_certificate_exit_4(capsys, tmp_path):
    path = build_file(capsys, tmp_path, ["build", "subtorus-fs", "--exponents", "1,0;0,1;1,1", "--coords", "1,2,4,1"])
    assert run(capsys, ["solve", str(path), "--tol", "0"])[0] == 4


# -- figures ------------------------------------------------------------------------


def test_svg_is_deterministic(capsys, tmp_path):
    path = build_file(capsys, tmp_path, QUADRIC)
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    assert main(["plot", str(path), "-o", str(a)]) == 0
    assert main(["plot", str(path), "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    svg = a.read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    assert "(1/2,1/2): 3/2·log(2)" in svg


def test_cubic_kinks_labelled(capsys, tmp_path):
    path = build_file(capsys, tmp_path, CUBIC)
    _, svg, _ = run(capsys, ["plot", str(path)])
    ticks = re.findall(r'text-anchor="middle">([^<]*)<', svg)
    assert set(ticks) == {"0", "1", "2", "3"}
    assert "7/3·log(2)+1/2·log(3)" in svg


def test_csv_samples(capsys, tmp_path):
    path = build_file(capsys, tmp_path, CUBIC)
    _, csv, _ = run(capsys, ["plot", str(path), "--out", "csv"])
    rows = [r.split(",") for r in csv.strip().splitlines()]
    assert rows[0][:2] == ["x1", "theta_global"]
    at1 = next(r for r in rows[1:] if r[0] == "1")
    assert abs(float(at1[1]) - 2.166649565640594) < 1e-12


def test_plot_rejects_high_rank(capsys, tmp_path):
    path = build_file(capsys, tmp_path, ["build", "canonical", "--simplex", "3"])
    assert run(capsys, ["plot", str(path)])[0] == 3
