import logging
import sys
from pathlib import Path
from typing import Any, Mapping

from dotenv import load_dotenv
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from riemannwave.core.exceptions import ConfigError


# Load environmental variables from the .env file
load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="RIEMANNWAVE_")

    project_name: str = "riemannwave"
    results_dir: str = "results"
    log_level: str = "INFO"
    sweep_workers: int = 1
    oracle_workers: int = 1
    oracle_block_rows: int = 64
    residual_tolerance: float = 1e-8
    chord_arc_threshold: float = 1e-6
    api_max_points: int = 512


settings = Settings()  # type: ignore


def configure_logging(level: str | None = None) -> None:
    logging.basicConfig(stream=sys.stdout, level=(level or settings.log_level).upper())


SECTIONS = ("grid", "physics", "stepping", "diagnostics", "output")


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse the flat key-value run file into a nested mapping of raw strings.

    Lines are blank, comments (``#`` or ``;``), ``[section]`` headers or
    ``dotted.key = value`` assignments. Keys outside a section are top level.
    """
    flat: dict[str, tuple[str, int]] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header", line=lineno)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section '{section}'", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        dotted = f"{section}.{key}" if section else key
        if dotted in flat:
            raise ConfigError(f"duplicate key (first set on line {flat[dotted][1]})", line=lineno, key=dotted)
        flat[dotted] = (value, lineno)

    nested: dict[str, Any] = {}
    for dotted, (value, lineno) in flat.items():
        head, _, tail = dotted.partition(".")
        if not tail:
            nested[head] = value
            continue
        if head not in SECTIONS or "." in tail:
            raise ConfigError("unknown key", line=lineno, key=dotted)
        nested.setdefault(head, {})[tail] = value
    return nested


def apply_overrides(data: dict[str, Any], overrides: Mapping[str, Any]) -> dict[str, Any]:
    for dotted, value in overrides.items():
        if value is None:
            continue
        head, _, tail = dotted.partition(".")
        if tail:
            data.setdefault(head, {})[tail] = value
        else:
            data[head] = value
    return data


def validate_run_config(data: dict[str, Any]):
    from riemannwave.schemas.config import RunConfig

    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(first["msg"], key=key) from exc


def load_run_config(path: str | Path, overrides: Mapping[str, Any] | None = None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    data = apply_overrides(parse_config_text(text), overrides or {})
    return validate_run_config(data)
