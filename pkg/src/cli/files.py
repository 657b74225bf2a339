"""Run directories and the run manifest."""

import os
import shutil
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.errors import InvalidArgumentError
from src.formats import read_versioned_json, write_versioned_json
from src.settings import FORMAT_VERSION


class RunManifest(BaseModel):
    """What was run, with which seed, and where the outputs went."""

    model_config = ConfigDict(extra="forbid")

    subcommand: str
    config_path: Optional[str] = None
    output_dir: str
    master_seed: Optional[int] = None
    format_version: int = FORMAT_VERSION
    arguments: Dict[str, Any] = Field(default_factory=dict)
    created_at: str = Field(default_factory=lambda: datetime.now().isoformat(timespec="seconds"))

    def save(self, directory: Path) -> Path:
        return write_versioned_json(self.model_dump(exclude={"format_version"}), Path(directory) / "manifest.json", "manifest")

    @classmethod
    def load(cls, directory: Path) -> "RunManifest":
        data = read_versioned_json(Path(directory) / "manifest.json", "manifest")
        data.pop("format")
        return cls.model_validate(data)


def prepare_output_dir(path: Path, force: bool = False) -> Path:
    """Create ``path`` atomically: build a sibling temp dir, then rename it into place.

    An existing non-empty directory is an error unless ``force`` is set, in which
    case it is replaced.
    """
    path = Path(path)
    if path.exists():
        if path.is_dir() and not any(path.iterdir()):
            return path
        if not force:
            raise InvalidArgumentError(f"output directory {path} already exists; use --force to overwrite")
        if path.is_dir():
            shutil.rmtree(path)
        else:
            path.unlink()
    path.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{path.name}-", dir=path.parent))
    try:
        os.replace(staging, path)
    except OSError:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return path
