import csv
import json
import re
import subprocess
import sys

import pytest

from torsionlab import cli
from torsionlab.cli import ConfigError, fmt, main, parse_config, validate_config

SIG_RE = re.compile(r"^-?\d(\.\d{1,11})?(e[+-]\d+)?$|^-?\d+(\.\d*)?$")


def write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_unknown_key_is_named(tmp_path):
    p = write(tmp_path, {"scenario": "gluing", "bogus_key": 1})
    with pytest.raises(ConfigError, match="bogus_key"):
        parse_config(p)
    assert main(["gluing", "--config", str(p), "--out", str(tmp_path)]) == cli.EXIT_USAGE


def test_bad_values_rejected():
    with pytest.raises(ConfigError):
        validate_config({"scenario": "eigencon", "T_list": [-1, 4]})
    with pytest.raises(ConfigError):
        validate_config({"scenario": "coupled-trace", "t_list": [0.5, 2.0]})
    with pytest.raises(ConfigError):
        validate_config({"scenario": "product", "n": "many"})


def test_config_round_trip(tmp_path):
    p = write(tmp_path, {"scenario": "eigencon", "T_list": [4, 8, 16, 32]})
    cfg = parse_config(p)
    assert cfg.scenario == "eigencon"
    assert list(cfg.params["T_list"]) == [4, 8, 16, 32]
    # defaults are filled in for keys left out
    assert cfg.params["k_max"] == 10


def test_unknown_scenario_exit_code(capsys):
    assert main(["nonsense"]) == 2
    assert "unknown scenario" in capsys.readouterr().err


def test_bad_threads_exit_code():
    assert main(["gluing", "--threads", "0"]) == 2


def test_gluing_run_writes_stable_outputs(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["gluing", "--out", str(out1), "--seed", "3"]) == 0
    assert main(["gluing", "--out", str(out2), "--seed", "3"]) == 0
    for ext in ("csv", "json"):
        b1 = (out1 / f"gluing.{ext}").read_bytes()
        assert b1 == (out2 / f"gluing.{ext}").read_bytes()
        assert b"\r\n" not in b1
    with open(out1 / "gluing.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    assert header[:2] == ["scenario", "check"]
    assert header[-4:] == ["measured", "target", "residual", "error_estimate"]
    for row in rows[1:]:
        for cell in row[-4:]:
            assert SIG_RE.match(cell), cell
    data = json.loads((out1 / "gluing.json").read_text())
    assert data["passed"] is True
    assert data["config"]["seed"] == 3


def test_fmt_twelve_significant_digits():
    assert fmt(1.0 / 3.0) == "0.333333333333"
    assert fmt(123456789.123456789) == "123456789.123"
    assert fmt(2.5e-20) == "2.5e-20"
    assert fmt(True) == "true"
    assert fmt(None) == ""


def test_config_scenario_mismatch(tmp_path):
    p = write(tmp_path, {"scenario": "product"})
    assert main(["gluing", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "torsionlab.cli", "interval-metric", "--config", str(write(tmp_path, {"T_list": [0]})), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert (tmp_path / "interval-metric.csv").exists()
