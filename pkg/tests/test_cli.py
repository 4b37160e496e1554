import csv
import json

import pytest

from conftest import EXAMPLE_CONFIG
from quasi_sierpinski.cli import main


def _write(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _error(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)["error"]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_generate(tmp_path, capsys):
    assert main(["generate", "--config", str(EXAMPLE_CONFIG), "--out", str(tmp_path)]) == 0
    assert "48 nodes, 77 members, 17 supports" in capsys.readouterr().out
    topo = json.loads((tmp_path / "topology.json").read_text())
    assert topo["kind"] == "topology" and len(topo["nodes"]) == 48


@pytest.mark.parametrize("patch, fragment", [
    ({"levels": 1}, "levels must be >= 2"),
    ({"ratios_horizontal": [1.0, 0.75, 0.5]}, "ratios_horizontal[3]"),
])
def test_generate_validation(tmp_path, capsys, example_data, patch, fragment):
    path = _write(tmp_path, {**example_data, **patch})
    assert main(["generate", "--config", path, "--out", str(tmp_path)]) == 2
    err = _error(capsys)
    assert err["code"] == "validation" and err["exit_code"] == 2
    assert any(fragment in m for m in err["messages"])


def test_analyze(tmp_path):
    assert main(["analyze", "--config", str(EXAMPLE_CONFIG), "--out", str(tmp_path)]) == 0
    sup = _rows(tmp_path / "supports.csv")
    assert float(sup[0]["delta"]) == -0.065625
    assert float(sup[0]["stiffness_kN_per_mm"]) == pytest.approx(2.97619e-3, rel=1e-5)
    nodes = {(int(r["level"]), int(r["ordinal"])): r for r in _rows(tmp_path / "nodes.csv")}
    assert float(nodes[(1, 1)]["epsilon"]) == pytest.approx(-0.101370, abs=1e-6)
    for n in range(1, 6):
        for t in range(1, 2 ** (n - 1) + 1):
            mirror = nodes[(n, 2 ** (n - 1) + 1 - t)]
            assert float(nodes[(n, t)]["mu"]) == pytest.approx(-float(mirror["mu"]), abs=1e-15)


def test_analyze_non_compressive(tmp_path, capsys, example_data):
    path = _write(tmp_path, {**example_data, "boundary": {"z1": 1, "z2": 17, "d1": -0.01, "d2": -0.01}})
    assert main(["analyze", "--config", path, "--out", str(tmp_path)]) == 2
    err = _error(capsys)
    assert err["code"] == "non_compressive_support"
    assert any("9" in m for m in err["messages"])
    assert main(["analyze", "--config", path, "--out", str(tmp_path), "--allow-nonnegative-delta"]) == 0


def test_verify_pass(tmp_path, capsys):
    assert main(["verify", "--config", str(EXAMPLE_CONFIG), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "comparison.json").read_text())
    assert report["passed"] is True
    assert "overall: PASS" in capsys.readouterr().out


def test_verify_zeroed_stiffness(tmp_path, capsys, example_data):
    path = _write(tmp_path, {**example_data, "stiffness_factors": {"5": 0.0}})
    code = main(["verify", "--config", path, "--out", str(tmp_path)])
    assert code != 0
    assert _error(capsys)["exit_code"] == code


def test_verify_scaled_stiffness_fails(tmp_path, example_data):
    path = _write(tmp_path, {**example_data, "stiffness_factors": {"9": 1.1}})
    assert main(["verify", "--config", path, "--out", str(tmp_path)]) == 4


def test_verify_two_levels(tmp_path):
    data = {
        "levels": 2, "beta_tan": 1.0, "height": 1000.0, "load": 10.0,
        "area_inclined": 5.0, "modulus_inclined": 200.0, "area_horizontal": 1.0, "modulus_horizontal": 200.0,
        "ratios_inclined": [1.0, 0.5], "ratios_horizontal": [1.0],
        "boundary": {"z1": 1, "z2": 3, "d1": -0.05, "d2": -0.05},
    }
    assert main(["verify", "--config", _write(tmp_path, data), "--out", str(tmp_path)]) == 0


def test_serialized_round_trip(tmp_path):
    cfg = str(EXAMPLE_CONFIG)
    assert main(["generate", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", "--topology", str(tmp_path / "a" / "topology.json"),
                 "--analysis", str(tmp_path / "a" / "analysis.json"), "--out", str(tmp_path / "b")]) == 0
    assert json.loads((tmp_path / "b" / "comparison.json").read_text())["passed"]


def test_plot_deformed(tmp_path):
    assert main(["plot", "--config", str(EXAMPLE_CONFIG), "--what", "deformed", "--magnify", "1",
                 "--out", str(tmp_path)]) == 0
    svg = (tmp_path / "deformed.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg
    rows = {(int(r["level"]), int(r["ordinal"])): r for r in _rows(tmp_path / "deformed.csv")}
    assert float(rows[(6, 1)]["y_deformed_mm"]) == pytest.approx(-1050.0, rel=1e-12)


def test_plot_takagi_endpoints(tmp_path):
    assert main(["plot", "--config", str(EXAMPLE_CONFIG), "--what", "takagi", "--ratio", "0.5",
                 "--depth", "60", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "takagi.csv")
    assert float(rows[0]["takagi"]) == 0.0 and float(rows[-1]["takagi"]) == 0.0
    mid = rows[len(rows) // 2]
    assert float(mid["x"]) == 0.5 and float(mid["takagi"]) == pytest.approx(1.0, abs=1e-15)


def test_plot_j_and_cantor(tmp_path):
    assert main(["plot", "--config", str(EXAMPLE_CONFIG), "--what", "j", "--ratio", "1.5",
                 "--depth", "60", "--out", str(tmp_path)]) == 0
    assert float(_rows(tmp_path / "j.csv")[-1]["j"]) == pytest.approx(0.75, abs=1e-14)
    assert main(["plot", "--config", str(EXAMPLE_CONFIG), "--what", "cantor", "--ratio", "1.5",
                 "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "cantor.csv")
    values = [float(r["cantor"]) for r in rows]
    assert values[0] == 0.0 and values[-1] == pytest.approx(1.0, abs=1e-12)
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_plot_displacements(tmp_path):
    assert main(["plot", "--config", str(EXAMPLE_CONFIG), "--what", "displacements",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "displacements.svg").exists()
    rows = _rows(tmp_path / "displacements.csv")
    assert float(rows[0]["f_epsilon_6"]) == -0.065625


def test_plot_unknown_kind(tmp_path, capsys):
    assert main(["plot", "--config", str(EXAMPLE_CONFIG), "--what", "bogus", "--out", str(tmp_path)]) == 1
    assert _error(capsys)["code"] == "usage"


def test_sweep(tmp_path):
    code = main(["sweep", "--config", str(EXAMPLE_CONFIG), "--out", str(tmp_path),
                 "--vary", "load=50,100", "--vary", "boundary.d1=-0.07,-0.08"])
    assert code == 0
    summary = _rows(tmp_path / "summary.csv")
    assert len(summary) == 4 and all(r["status"] == "pass" for r in summary)
    assert (tmp_path / "run_003" / "analysis.json").exists()


@pytest.mark.parametrize("argv, code", [
    ([], 1),
    (["analyze"], 1),
    (["frobnicate"], 1),
    (["analyze", "--config", "/nonexistent/config.json"], 2),
])
def test_error_paths_machine_parsable(argv, code, capsys):
    assert main(argv) == code
    err = _error(capsys)
    assert err["exit_code"] == code and isinstance(err["code"], str)


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["analyze", "--config", str(path)]) == 2
    assert _error(capsys)["code"] == "validation"
