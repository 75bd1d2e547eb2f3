import csv
import io
import json
import math

import pytest

from bellbench.cli import main, parse_settings
from bellbench.errors import ValidationError

from conftest import TSIRELSON


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def settings_file(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(p)


CHSH_FILE = {
    "n": 2,
    "parties": [
        {"theta": math.pi / 2, "phi": 0.0, "theta_prime": math.pi / 2, "phi_prime": math.pi / 2},
        {"theta": math.pi / 2, "phi": -math.pi / 4, "theta_prime": math.pi / 2, "phi_prime": math.pi / 4},
    ],
}


def test_bound_theorem1(capsys):
    code, out, _ = run(capsys, "bound", "--theorem1", "--n", "4")
    env = json.loads(out)
    assert code == 0
    assert env["command"] == "bound" and env["tool_version"]
    assert env["results"]["operator_norm"] == pytest.approx(TSIRELSON, abs=1e-12)
    assert env["results"]["classical_bound"] == 2


def test_bound_example4(capsys):
    code, out, _ = run(capsys, "bound", "--example4")
    res = json.loads(out)["results"]
    assert res["operator_norm"] == pytest.approx(TSIRELSON, abs=1e-12)
    assert res["top_multiplicity"] == 4


def test_bound_settings_file(capsys, tmp_path):
    code, out, _ = run(capsys, "bound", "--settings", settings_file(tmp_path, CHSH_FILE))
    assert code == 0
    assert json.loads(out)["results"]["operator_norm"] == pytest.approx(TSIRELSON, abs=1e-12)


def test_bound_settings_degrees(capsys, tmp_path):
    deg = {"n": 2, "parties": [
        {"theta": 90, "phi": 0, "theta_prime": 90, "phi_prime": 90},
        {"theta": 90, "phi": -45, "theta_prime": 90, "phi_prime": 45},
    ]}
    code, out, _ = run(capsys, "bound", "--degrees", "--settings", settings_file(tmp_path, deg))
    assert json.loads(out)["results"]["operator_norm"] == pytest.approx(TSIRELSON, abs=1e-12)


def test_bound_n_mismatch_is_parse_error(capsys, tmp_path):
    bad = dict(CHSH_FILE, n=3)
    code, _, err = run(capsys, "bound", "--settings", settings_file(tmp_path, bad))
    assert code == 2
    assert "parties" in err and "n = 3" in err


def test_bound_requires_source(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bound"])
    assert info.value.code == 2


@pytest.mark.parametrize(
    "text,fragment",
    [
        ('{"n": 2,\n "parties": [}', ":2:"),
        ('{"n": 2, "parties": [], "extra": 1}', "unknown field(s) extra"),
        ('{"n": 1, "parties": [{"theta": 0, "phi": 0, "theta_prime": 0, "phi_prime": 0}]}', "at least 2"),
        ('{"n": 2, "parties": [{"theta": 0, "phi": 0, "theta_prime": 0}, {}]}', "parties[0]: missing field 'phi_prime'"),
        ('{"n": 2, "parties": [{"theta": 0, "phi": "x", "theta_prime": 0, "phi_prime": 0}, {}]}', "parties[0].phi"),
        ('{"n": 2, "parties": [{"theta": 0, "phi": 0, "theta_prime": 0, "phi_prime": 0, "psi": 1}, {}]}', "parties[0]: unknown"),
        ('[1, 2]', "top level"),
        ('{"parties": []}', "missing field 'n'"),
    ],
)
def test_settings_parse_diagnostics(text, fragment):
    with pytest.raises(ValidationError) as info:
        parse_settings(text, source="f.json")
    assert fragment in str(info.value)


def test_missing_settings_file(capsys, tmp_path):
    code, _, err = run(capsys, "bound", "--settings", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read" in err


def test_facet(capsys):
    code, out, _ = run(capsys, "facet", "--n", "2")
    res = json.loads(out)["results"]
    assert code == 0 and res["is_tight"] and res["affine_rank"] == 3 and res["ambient_dim"] == 4
    code, out, _ = run(capsys, "facet", "--n", "3")
    assert json.loads(out)["results"]["is_tight"]
    assert "full-correlation polytope" in json.loads(out)["notes"][0]


def test_facet_budget_exit_code(capsys):
    code, _, err = run(capsys, "facet", "--n", "8")
    assert code == 3 and "2^16" in err


def test_identify(capsys):
    code, out, _ = run(capsys, "identify", "--n", "5")
    assert code == 0 and json.loads(out)["results"]["certified"]
    code, out, _ = run(capsys, "identify", "--n", "2")
    assert json.loads(out)["results"]["gap"] == pytest.approx(TSIRELSON, abs=1e-12)


def test_identify_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["identify", "--n", "1"])
    assert info.value.code == 2


def test_capacity_exit_code(capsys, monkeypatch):
    monkeypatch.setenv("BELLBENCH_MAX_DIM", "16")
    code, _, err = run(capsys, "identify", "--n", "5")
    assert code == 3 and "capacity" in err


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "3", "--theta-steps", "5", "--restarts", "4", "--seed", "2")
    env = json.loads(out)
    rows = env["results"]["rows"]
    assert env["seed"] == 2
    assert rows[0][:3] == [0.0, 0.0, 0.0]
    assert rows[-1][0] == pytest.approx(math.pi / 4)
    assert rows[-1][1] == pytest.approx(TSIRELSON)
    assert env["results"]["max_abs_difference"] <= 1e-6


def test_sweep_csv_format(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "2", "--theta-steps", "3", "--out", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["vartheta", "analytic", "optimized", "abs_difference"]
    assert rows[-1][1] == "2.82842712474619"
    assert rows[1][2] == "0"
    assert all("," not in cell for row in rows for cell in row)


def test_sweep_needs_two_steps():
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--n", "2", "--theta-steps", "1"])
    assert info.value.code == 2


def test_robust_example4(capsys):
    code, out, _ = run(capsys, "robust", "--example4", "--samples", "100", "--seed", "7")
    res = json.loads(out)["results"]
    assert code == 0
    assert res["degenerate_multiplicity"] == 4
    assert len(res["sampled_values"]) == 200
    assert all(abs(s["value"] - TSIRELSON) <= 1e-9 for s in res["sampled_values"])
    assert len(res["eigenbasis"]) == 4 and len(res["eigenbasis"][0]) == 16


def test_robust_theorem1_and_zero_samples(capsys):
    _, out, _ = run(capsys, "robust", "--theorem1", "--n", "4")
    res = json.loads(out)["results"]
    assert res["degenerate_multiplicity"] == 1 and res["sampled_values"] == []
    _, out, _ = run(capsys, "robust", "--example4", "--samples", "0")
    res = json.loads(out)["results"]
    assert res["degenerate_multiplicity"] == 4 and res["samples"] == 0


def test_werner_csv(capsys):
    code, out, _ = run(capsys, "werner", "--n", "2", "--eps-steps", "3", "--out", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["eps", "value"]
    values = [float(r[1]) for r in rows[1:]]
    assert values[0] == pytest.approx(TSIRELSON, abs=1e-14)
    assert values[1] == pytest.approx(values[0] / 2, abs=1e-14)
    assert values[2] == 0


def test_werner_json(capsys):
    code, out, _ = run(capsys, "werner", "--n", "3", "--eps-steps", "11")
    rows = json.loads(out)["results"]["rows"]
    assert len(rows) == 11 and all(v < TSIRELSON for e, v in rows if e > 0)


def test_json_output_is_stable(capsys):
    first = run(capsys, "robust", "--example4", "--samples", "3", "--seed", "1")[1]
    second = run(capsys, "robust", "--example4", "--samples", "3", "--seed", "1")[1]
    assert first == second
    assert "NaN" not in first and "Infinity" not in first
