"""Versioned CSV and JSON files shared by every output writer."""

import json
import re
from pathlib import Path
from typing import Any, Dict

import pandas as pd

from src.errors import InvalidArgumentError
from src.settings import FORMAT_VERSION, check_format_version

_HEADER = re.compile(r"^# npvo-(?P<kind>[a-z0-9-]+) v(?P<version>\d+)\s*$")


def csv_header(kind: str) -> str:
    return f"# npvo-{kind} v{FORMAT_VERSION}\n"


def write_versioned_csv(frame: pd.DataFrame, path: Path, kind: str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(csv_header(kind))
        frame.to_csv(f, index=False, lineterminator="\n")
    return path


def read_versioned_csv(path: Path, kind: str, **read_kwargs) -> pd.DataFrame:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline()
    match = _HEADER.match(first)
    if match is None:
        raise InvalidArgumentError(f"{path}: missing '# npvo-{kind} vN' header")
    if match["kind"] != kind:
        raise InvalidArgumentError(f"{path}: expected a {kind} file, found {match['kind']}")
    check_format_version(int(match["version"]), str(path))
    return pd.read_csv(path, skiprows=1, **read_kwargs)


def write_versioned_json(payload: Dict[str, Any], path: Path, kind: str) -> Path:
    path = Path(path)
    body = {"format": f"npvo-{kind}", "format_version": FORMAT_VERSION, **payload}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(body, f, indent=2, ensure_ascii=False)
        f.write("\n")
    return path


def read_versioned_json(path: Path, kind: str) -> Dict[str, Any]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if data.get("format") != f"npvo-{kind}":
        raise InvalidArgumentError(f"{path}: expected format npvo-{kind}, found {data.get('format')}")
    check_format_version(data.get("format_version"), str(path))
    return data
