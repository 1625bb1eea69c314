import csv
import os

import numpy as np
import pytest

from d2d_powergame.baselines import get_rule
from d2d_powergame.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_IO, EXIT_OK, format_value, main
from d2d_powergame.config import Config, parse_config, serialize_config
from d2d_powergame.exceptions import ConfigError
from d2d_powergame.experiments import Axis, GainModel, generate_scenario
from d2d_powergame.game import GameParams, run_to_convergence

SMALL = """
# quick settings for CLI tests
[scenario]
seed = 3
feasible_for = 5
[sweep]
axis = price
values = 0, 5100
repetitions = 2
[compare]
repetitions = 2
[check]
samples = 50
"""


def test_empty_config_defaults():
    cfg = parse_config("")
    assert cfg == Config()
    assert cfg.game.target == 5.0 and cfg.game.price == 5100.0 and cfg.game.alpha == 0.0
    assert cfg.game.initial_power == 8e-3
    assert cfg.scenario.n_devices == 20 and cfg.scenario.p_max == 0.1
    assert cfg.scenario.noise_power == 5e-15


def test_alpha_invariant_error():
    with pytest.raises(ConfigError) as info:
        parse_config("\n\ngame.alpha = 1.5\n")
    assert info.value.key == "game.alpha" and info.value.line == 3
    assert "0 <= alpha < 1" in str(info.value)


def test_unknown_key():
    with pytest.raises(ConfigError) as info:
        parse_config("[game]\nbeta = 2\n")
    assert info.value.line == 2 and "beta" in str(info.value)


def test_type_mismatch():
    with pytest.raises(ConfigError) as info:
        parse_config("scenario.n_devices = lots")
    assert info.value.key == "scenario.n_devices" and info.value.line == 1


def test_bad_lines():
    for text in ("just words", "[nosuch]\n", "rule = priced\nrule = cdpc\n", "sweep.axis = sideways"):
        with pytest.raises(ConfigError):
            parse_config(text)


def test_cross_field_invariant_names_key():
    with pytest.raises(ConfigError) as info:
        parse_config("scenario.n_devices = 2\nscenario.n_cellular = 5\n")
    assert info.value.key == "scenario.n_cellular" and info.value.line == 2


def test_sections_and_dotted_keys_agree():
    a = parse_config("[game]\nalpha = 0.02\nprice = 0\n")
    b = parse_config("game.alpha = 0.02\ngame.price = 0  # trailing comment\n")
    assert a == b and a.game.alpha == 0.02


@pytest.mark.parametrize(
    "text",
    ["", SMALL, "game.alpha = 0.5\nrule = cdpc\nsweep.axis = alpha\nsweep.values = 0, 0.01, 0.5\n",
     "scenario.gain_model = explicit\nscenario.gains = 0.1, 0.2\nscenario.n_cellular = 0\n"],
)
def test_round_trip(text):
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


def test_explicit_gains_parse():
    cfg = parse_config("scenario.gain_model = explicit\nscenario.gains = 0.1, 0.2\nscenario.n_cellular = 0\n")
    assert cfg.scenario.gain_model is GainModel.EXPLICIT and cfg.scenario.n_devices == 2


def test_sweep_axis_parse():
    assert parse_config("sweep.axis = device_count\nsweep.values = 2, 4\n").sweep.axis is Axis.DEVICE_COUNT


def test_format_value():
    assert format_value("power_w", 0.008) == "8e-03"
    assert format_value("sinr", 4.5) == "4.5"
    assert format_value("converged", True) == "true"
    assert format_value("k", np.int64(3)) == "3"
    assert float(format_value("power_w", 1.2345678901234567e-9)) == 1.2345678901234567e-9


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL, encoding="utf-8")
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_cmd_run_matches_in_process(small_config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", small_config, "--out", str(out)]) == EXIT_OK
    rows = read_rows(out / "run.csv")
    assert list(rows[0]) == ["k", "device_id", "power_w", "sinr", "utility"]
    cfg = parse_config(SMALL)
    res = run_to_convergence(generate_scenario(cfg.scenario), cfg.game, get_rule("priced"))
    last = [r for r in rows if int(r["k"]) == res.iterations_used]
    assert len(rows) == res.iterations_used * 20 and len(last) == 20
    np.testing.assert_array_equal([float(r["power_w"]) for r in last], res.final_powers)
    np.testing.assert_array_equal([float(r["sinr"]) for r in last], res.final_sinrs)
    # priced fixed point: gamma = T - (c/2) * I/h, just below the target
    assert all(4.0 < float(r["sinr"]) < 5.0 for r in last)


def test_cmd_check_unpriced_passes(small_config, tmp_path):
    assert main(["check", "--config", small_config, "--out", str(tmp_path), "--rule", "unpriced"]) == EXIT_OK
    (row,) = read_rows(tmp_path / "check.csv")
    assert row["positivity_ok"] == row["monotonicity_ok"] == row["scalability_ok"] == "true"
    assert row["nonsingular"] == "true"


def test_cmd_check_failure_exit(small_config, tmp_path):
    # the priced map is not monotone over the whole power range
    assert main(["check", "--config", small_config, "--out", str(tmp_path), "--rule", "priced"]) == EXIT_CHECK_FAILED


def test_cmd_compare_rows(small_config, tmp_path):
    assert main(["compare", "--config", small_config, "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "compare.csv")
    assert list(rows[0]) == ["rule", "mean_power_w", "iterations"]
    assert [r["rule"] for r in rows] == ["priced", "cdpc"]
    assert float(rows[0]["mean_power_w"]) < float(rows[1]["mean_power_w"])


def test_cmd_sweep_rows(small_config, tmp_path):
    assert main(["sweep", "--config", small_config, "--out", str(tmp_path)]) == EXIT_OK
    rows = read_rows(tmp_path / "sweep.csv")
    assert len(rows) == 4 and rows[0]["axis"] == "price"


def test_text_format(small_config, tmp_path):
    assert main(["compare", "--config", small_config, "--out", str(tmp_path), "--format", "text"]) == EXIT_OK
    assert (tmp_path / "compare.txt").read_text().splitlines()[0].split() == ["rule", "mean_power_w", "iterations"]


def test_seed_flag_overrides(small_config, tmp_path):
    main(["run", "--config", small_config, "--out", str(tmp_path / "a"), "--seed", "3"])
    main(["run", "--config", small_config, "--out", str(tmp_path / "b"), "--seed", "4"])
    main(["run", "--config", small_config, "--out", str(tmp_path / "c")])
    a, b, c = ((tmp_path / d / "run.csv").read_bytes() for d in "abc")
    assert a == c and a != b


def test_config_error_exit(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("game.alpha = 1.5\n")
    assert main(["run", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "game.alpha" in capsys.readouterr().err


def test_unknown_rule_exit(tmp_path):
    assert main(["run", "--rule", "norm2", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_io_error_exit(small_config, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--config", small_config, "--out", str(blocker / "sub")]) == EXIT_IO
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_IO


def test_csv_uses_lf(small_config, tmp_path):
    main(["compare", "--config", small_config, "--out", str(tmp_path)])
    assert b"\r\n" not in (tmp_path / "compare.csv").read_bytes()
