"""Environment settings and YAML config loading."""

import os
import sys
from pathlib import Path
from typing import Any, Dict, Type, TypeVar

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ValidationError

from src.errors import ConfigError, VersionError

load_dotenv()

FORMAT_VERSION = 1

ModelT = TypeVar("ModelT", bound=BaseModel)


def output_root() -> Path:
    return Path(os.getenv("NPVO_OUTPUT_ROOT", "runs"))


def log_dir() -> Path:
    return Path(os.getenv("NPVO_LOG_DIR", "logs"))


def configure_logging(level: str = None) -> None:
    """Route loguru output to stderr at the configured level."""
    logger.remove()
    logger.add(sys.stderr, level=(level or os.getenv("NPVO_LOG_LEVEL", "INFO")).upper())


def check_format_version(version: Any, source: str) -> None:
    if version is None:
        return
    if not isinstance(version, int) or version < 1:
        raise ConfigError(f"{source}: format_version must be a positive integer", field="format_version")
    if version > FORMAT_VERSION:
        raise VersionError(
            f"{source}: format_version {version} is newer than supported version {FORMAT_VERSION}"
        )


def _field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ()))


def parse_config(data: Dict[str, Any], model: Type[ModelT], source: str = "<config>") -> ModelT:
    """Validate a raw mapping against ``model``; unknown keys are errors."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    check_format_version(data.get("format_version"), source)
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = _field_path(first)
        raise ConfigError(f"{source}: invalid field '{field}': {first['msg']}", field=field) from e


def load_config(path: Path, model: Type[ModelT]) -> ModelT:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: malformed YAML: {e}") from e
    logger.debug(f"Loaded config {path}")
    return parse_config(data or {}, model, source=str(path))
