"""Configuration loader for raimsim.yaml."""

from pathlib import Path

import yaml
from pydantic import ValidationError

from raimsim.config.schema import RaimsimConfig
from raimsim.exceptions import ConfigNotFoundError, ConfigValidationError

CONFIG_FILENAME = "raimsim.yaml"


def format_validation_error(error: ValidationError) -> str:
    """One ``dotted.field: message`` line per problem."""
    lines = []
    for problem in error.errors():
        location = ".".join(str(part) for part in problem["loc"]) or "<root>"
        lines.append(f"{location}: {problem['msg']}")
    return "\n".join(lines)


class ConfigLoader:
    """Loads and saves a raimsim configuration file."""

    def __init__(self, config_path: Path | None = None):
        self.config_path = config_path or Path.cwd() / CONFIG_FILENAME

    def exists(self) -> bool:
        """Check if config file exists."""
        return self.config_path.exists()

    def load(self) -> RaimsimConfig:
        """Load configuration from file."""
        if not self.exists():
            raise ConfigNotFoundError(f"Config file not found: {self.config_path}")

        try:
            with open(self.config_path) as f:
                data = yaml.safe_load(f) or {}
        except yaml.MarkedYAMLError as e:
            mark = e.problem_mark
            where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
            raise ConfigValidationError(f"Invalid YAML{where}: {e.problem}") from e
        except yaml.YAMLError as e:
            raise ConfigValidationError(f"Invalid YAML in config file: {e}") from e

        if not isinstance(data, dict):
            raise ConfigValidationError("Config file must contain a mapping at the top level")

        try:
            return RaimsimConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigValidationError(
                f"Config validation failed:\n{format_validation_error(e)}"
            ) from e

    def save(self, config: RaimsimConfig) -> None:
        """Save configuration to file."""
        from ruamel.yaml import YAML

        ruamel = YAML()
        ruamel.default_flow_style = False
        ruamel.indent(mapping=2, sequence=4, offset=2)

        with open(self.config_path, "w") as f:
            ruamel.dump(config.to_yaml_dict(), f)


def load_config(config_path: Path | None = None) -> RaimsimConfig:
    """Convenience function to load config."""
    return ConfigLoader(config_path).load()
