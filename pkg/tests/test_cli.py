"""Command-line front end."""

import csv
import io
import json

import pytest

from lambdacpa.cli import run
from lambdacpa.figures import PRESETS


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_threshold_two_level():
    code, out, _ = call("cpa-threshold", "--variant", "two-level", "--r", "0")
    assert code == 0
    vals = [float(r["delta_p_over_Gamma"]) for r in rows(out)]
    assert vals == pytest.approx([-7.0533679898, 7.0533679898], abs=1e-9)


def test_chi_at_eit_is_zero():
    code, out, _ = call("chi", "--delta-p", "0", "--intensity", "0", "--variant", "reduced", "--r", "0")
    assert code == 0
    assert rows(out)[0]["chi"] == "0+0i"


def test_omega_zero_means_two_level():
    code, out, _ = call("cpa-point", "--omega1", "0", "--delta-p", "7")
    assert code == 0
    forms = {r["form"]: float(r["i_in"]) for r in rows(out)}
    assert forms == pytest.approx({"closed": 9.375, "taylor": 9.375})


def test_curve_header_and_stability():
    code, out, _ = call("curve", "--variant", "two-level", "--delta-p", "6", "--iin-min", "0",
                        "--iin-max", "300", "--iin-steps", "20")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert {"i_in", "i_out", "stable"} <= set(header)
    assert {r["stable"] for r in rows(out)} == {"true", "false"}


def test_json_output():
    code, out, _ = call("regime", "--omega1", "2.5", "--delta-p", "7", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert "Bistable" in json.dumps(doc)


def test_exit_codes():
    assert call("curve", "--iin-min", "5", "--iin-max", "1", "--iin-steps", "10")[0] == 1
    assert call("cpa-point", "--omega1", "0", "--variant", "reduced", "--gamma31", "0.5")[0] == 1
    assert call("nonsense")[0] == 1
    code, _, err = call("hysteresis", "--omega1", "0", "--delta-p", "7", "--iin-min", "1",
                        "--iin-max", "100", "--iin-steps", "50")
    assert code == 2 and err
    assert call("onset", "--variant", "two-level", "--swept", "r_pump", "--delta-p", "7",
                "--bracket-lo", "0", "--bracket-hi", "0.9")[0] == 2


def test_config_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"system": {"omega1": 0.0, "delta_p": 7.0}}))
    _, out, _ = call("cpa-point", "--config", str(cfg))
    assert float(rows(out)[0]["i_in"]) == pytest.approx(9.375)
    _, out, _ = call("cpa-point", "--config", str(cfg), "--delta-p", "6")
    assert float(rows(out)[0]["delta_p_over_Gamma"]) == 6.0
    cfg.write_text(json.dumps({"omega_one": 1.0}))
    assert call("cpa-point", "--config", str(cfg))[0] == 1


def test_infeasible_cells_are_empty():
    code, out, _ = call("cpa-locus", "--omega1", "0", "--axis1", "delta_p:-10:10:21", "--axis2", "r_pump:0:1:3")
    assert code == 0
    cells = [r["i_in_cpa"] for r in rows(out)]
    assert "" in cells and all(c == "" or float(c) >= 0 for c in cells)


def test_deterministic_figure(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert call("figure", "fig6b", "--out", str(a))[0] == 0
    assert call("figure", "fig6b", "--out", str(b))[0] == 0
    files = sorted(p.name for p in a.iterdir())
    assert files and files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_fig6a_three_curves(tmp_path):
    assert call("figure", "fig6a", "--out", str(tmp_path))[0] == 0
    curves = [p for p in tmp_path.iterdir() if "omega1_" in p.name]
    assert len(curves) == 3


@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_presets_run(preset, tmp_path):
    assert call("figure", preset, "--out", str(tmp_path / preset))[0] == 0


def test_oracle_command():
    code, out, _ = call("oracle", "--omega1", "0", "--delta-p", "6", "--delta-ac", "-6", "--i-in", "170")
    assert code == 0
    table = rows(out)
    assert [r["outcome"] for r in table] == ["attracted", "repelled", "attracted"]
    assert all(r["confirmed"] == "true" for r in table)
