import math

import pytest

from riemannwave.cli import main
from riemannwave.core.config import apply_overrides, load_run_config, parse_config_text, validate_run_config
from riemannwave.core.exceptions import EXIT_CONFIG, ConfigError

GOOD = """
# single mode
seed = 3

[grid]
N = 64
L = 2pi

[physics]
epsilon = 0.01
profile = single_mode

[stepping]
dt = 0.01
T_final = 0.05

[diagnostics]
max_j = 1

[output]
formats = csv, json
"""


def test_parse_nested_sections():
    data = parse_config_text(GOOD)
    assert data["seed"] == "3"
    assert data["grid"] == {"N": "64", "L": "2pi"}
    assert data["stepping"]["T_final"] == "0.05"


def test_validated_config():
    config = validate_run_config(parse_config_text(GOOD))
    assert config.seed == 3
    assert config.grid.L == pytest.approx(2 * math.pi)
    assert config.diagnostics.jet_order == 4
    assert config.output.formats == ["csv", "json"]
    assert config.stepping.cfl is None


@pytest.mark.parametrize(
    "text, line",
    [
        ("[grid\nN = 64", 1),
        ("[grid]\nN 64", 2),
        ("[waves]\n", 1),
        ("[grid]\nN = 64\nN = 128", 3),
        ("[grid]\nextra.key = 1", 2),
    ],
)
def test_parse_errors_carry_the_line(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


@pytest.mark.parametrize(
    "override, key",
    [
        ({"grid.N": "96"}, "grid.N"),
        ({"physics.epsilon": "-1"}, "physics.epsilon"),
        ({"diagnostics.max_j": "5"}, "diagnostics"),
        ({"output.formats": "csv, xml"}, "output.formats"),
    ],
)
def test_invalid_values_name_the_key(override, key):
    data = apply_overrides(parse_config_text(GOOD), override)
    with pytest.raises(ConfigError) as info:
        validate_run_config(data)
    assert info.value.key.startswith(key)


def test_missing_dt_and_cfl():
    text = GOOD.replace("dt = 0.01\n", "")
    with pytest.raises(ConfigError) as info:
        validate_run_config(parse_config_text(text))
    assert "missing dt and cfl" in str(info.value)


def test_overrides_skip_none():
    data = apply_overrides({"physics": {"epsilon": "0.1"}}, {"physics.epsilon": None, "seed": 7})
    assert data == {"physics": {"epsilon": "0.1"}, "seed": 7}


def test_load_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(GOOD)
    config = load_run_config(path, {"physics.epsilon": 0.02})
    assert config.physics.epsilon == 0.02


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.cfg")


def test_cli_config_error_exit_code(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[stepping]\nT_final = 1\n")
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG


def test_dt_and_cfl_are_exclusive():
    data = apply_overrides(parse_config_text(GOOD), {"stepping.cfl": "0.5"})
    with pytest.raises(ConfigError):
        validate_run_config(data)
