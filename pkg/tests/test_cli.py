import csv
import io
import json
import math

import pytest

from hbvm import cli
from hbvm.driver import IntegrationError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return config, rows


@pytest.mark.parametrize(
    "argv",
    [
        ["kepler", "--e", "0.5", "--periods", "1", "--r", "2", "--tol", "1e-8"],
        ["order", "--problem", "harmonic", "--r", "1"],
        ["energy", "--h", "0.1", "--steps", "5", "--periods", "1", "--e", "0.3", "--r", "2", "--tol", "1e-8"],
        ["miller"],
        ["stability", "--grid=-1,1,-1,1,3"],
        ["stiffness", "--lambda", "-100"],
    ],
)
def test_commands_run(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    config, rows = parse_csv(out)
    assert config["command"] == argv[0]
    assert rows and list(rows[0]) == cli.COLUMNS[argv[0]]


@pytest.mark.parametrize(
    "argv",
    [
        ["kepler", "--e", "1.2"],
        ["kepler", "--r", "3", "--k", "2"],
        ["order", "--h", "-0.1"],
        ["kepler", "--tol", "0"],
        ["miller", "--n-final", "1"],
        ["stiffness", "--lambda", "5"],
        ["stability", "--grid", "1,2,3"],
        ["stability", "--method", "bdf9"],
    ],
)
def test_config_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and "error" in err


def test_unknown_command_is_usage_error(capsys):
    assert run(capsys, "nonsense")[0] == 2


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def boom(args):
        raise IntegrationError("step size underflow", None)

    monkeypatch.setitem(cli.COMMANDS, "miller", (boom, ""))
    code, out, err = run(capsys, "miller")
    assert code == 3 and out == "" and "numerical failure" in err


def test_kepler_zero_periods_header_only(capsys):
    code, out, _ = run(capsys, "kepler", "--periods", "0")
    assert code == 0
    _, rows = parse_csv(out)
    assert rows == []


def test_output_is_deterministic(capsys, tmp_path):
    argv = ["kepler", "--e", "0.6", "--periods", "2", "--r", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main([*argv, "--out", str(a)]) == 0
    assert cli.main([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_row_records_everything(capsys):
    _, out, _ = run(capsys, "order", "--problem", "harmonic", "--r", "2", "--h", "0.2")
    config, rows = parse_csv(out)
    assert config["r"] == 2 and config["h"] == 0.2 and config["problem"] == "harmonic"
    # the nominal step is shortened so a whole number of steps spans the period
    for r, nominal in zip(rows, (0.2, 0.1, 0.05, 0.025)):
        assert int(r["steps"]) == math.ceil(2 * math.pi / nominal)
        assert float(r["h"]) <= nominal


def test_json_format(capsys):
    _, out, _ = run(capsys, "stiffness", "--format", "json")
    doc = json.loads(out)
    assert doc["columns"] == cli.COLUMNS["stiffness"]
    kinds = {r["kind"]: r for r in doc["rows"]}
    assert kinds["continuous"]["sigma"] == pytest.approx(1000.0)
    assert kinds["uniform_exact_samples"]["well_represented"] is False


def test_stability_trapezoid(capsys):
    _, out, _ = run(capsys, "stability", "--grid=-1,1,0,0,3")
    _, rows = parse_csv(out)
    flags = {float(r["re_q"]): r["stable"] for r in rows}
    assert flags == {-1.0: "1", 0.0: "0", 1.0: "0"}


def test_miller_columns(capsys):
    _, out, _ = run(capsys, "miller", "--n-final", "20")
    _, rows = parse_csv(out)
    assert len(rows) == 21
    assert any(float(r["forward"]) < 0 for r in rows[:16])
    for r in rows[:11]:
        assert abs(float(r["bvp"]) - float(r["exact"])) <= 1e-8 * abs(float(r["exact"]))


def test_energy_zero_step(capsys):
    _, out, _ = run(capsys, "energy", "--h", "0", "--steps", "3", "--periods", "0")
    _, rows = parse_csv(out)
    demo = [r for r in rows if r["series"] == "demo_map"]
    assert len(demo) == 4 and all(float(r["dH"]) == 0.0 for r in demo)
    assert not any(r["series"].startswith("quartic") for r in rows)


def test_order_reports_slopes(capsys):
    _, out, _ = run(capsys, "order", "--problem", "harmonic", "--r", "2")
    _, rows = parse_csv(out)
    slopes = [float(r["observed_order"]) for r in rows if r["observed_order"]]
    assert slopes and all(math.isfinite(s) and abs(s - 4) < 0.5 for s in slopes)


def test_output_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    assert cli.main(["miller", "--format", "json", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["config"]["command"] == "miller"
