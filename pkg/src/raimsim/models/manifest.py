"""Run manifest listing every emitted file and the resolved configuration."""

import json
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError

from raimsim.exceptions import OutputError

MANIFEST_FILENAME = "manifest.json"
MANIFEST_FORMAT_VERSION = "1"


class CellManifest(BaseModel):
    """Seeds, drawn bias means and files of one sweep cell."""

    stations: int
    noise_std: float
    cell_seed: int
    bias_means: list[float]
    files: list[str] = Field(default_factory=list)


class RunManifest(BaseModel):
    """Everything needed to reproduce a run's outputs."""

    format_version: str = MANIFEST_FORMAT_VERSION
    config_path: str | None = None
    output_dir: str
    master_seed: int
    config: dict
    cells: list[CellManifest] = Field(default_factory=list)
    files: list[str] = Field(default_factory=list)

    def all_files(self) -> list[str]:
        """Run-level files followed by every cell's files."""
        return [*self.files, *(name for cell in self.cells for name in cell.files)]


class ManifestManager:
    """Reads and writes ``manifest.json`` in an output directory."""

    def __init__(self, output_dir: Path):
        self.output_dir = output_dir

    @property
    def manifest_path(self) -> Path:
        return self.output_dir / MANIFEST_FILENAME

    def exists(self) -> bool:
        return self.manifest_path.exists()

    def load(self) -> RunManifest:
        try:
            with open(self.manifest_path) as f:
                data = json.load(f)
            return RunManifest.model_validate(data)
        except FileNotFoundError as e:
            raise OutputError(f"No manifest at {self.manifest_path}") from e
        except json.JSONDecodeError as e:
            raise OutputError(f"Invalid JSON in manifest: {e}") from e
        except ValidationError as e:
            raise OutputError(f"Invalid manifest format: {e}") from e

    def save(self, manifest: RunManifest) -> None:
        try:
            with open(self.manifest_path, "w") as f:
                json.dump(manifest.model_dump(mode="json"), f, indent=2)
                f.write("\n")
        except OSError as e:
            raise OutputError(f"Failed to write {self.manifest_path}: {e}") from e
