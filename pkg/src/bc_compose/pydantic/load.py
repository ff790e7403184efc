from __future__ import annotations

import importlib.resources as impres
import tomllib
from pathlib import Path

from ..logger import logger
from .dotmap import DotMapBaseModel
from .settings import CliOptions
from .settings import Defaults
from .settings import SettingsFile
from .settings import Tolerances

MERGE_WARNING = (
    "Merge overwrite has same value; consider removing from local config: %s"
)


class BcComposeConfig(DotMapBaseModel):
    """Unified configuration built from the packaged ``settings.toml``.

    Attributes:
        tolerances: Numeric tolerances used as defaults by every operation.
        defaults: Default physical and discretization parameters.
        cli: Command-line options and verification bands.
    """

    tolerances: Tolerances
    defaults: Defaults
    cli: CliOptions

    def merge_tomls(self, toml_dir: str | Path) -> BcComposeConfig:
        """Merge values from external TOML files into this config and return it.

        Files are applied in sorted order. Only known sections and keys are
        merged; values are validated on assignment.

        Args:
            toml_dir: Directory containing override ``*.toml`` files.

        Returns:
            BcComposeConfig: This config, updated in place.
        """
        cfg_dir = _resolve_toml_dir(toml_dir)
        for path in sorted(cfg_dir.glob("*.toml")):
            _merge_into(self, _load_toml(path))
        return self


def _load_toml(path: Path) -> dict[str, object]:
    with path.open("rb") as fh:
        return tomllib.load(fh)


def _resolve_toml_dir(toml_dir: str | Path) -> Path:
    cfg_dir = Path(toml_dir)
    if cfg_dir.exists():
        return cfg_dir
    fallback = Path.cwd() / str(toml_dir).lstrip("/\\")
    if fallback.exists():
        return fallback
    raise FileNotFoundError(f"TOML directory not found: {toml_dir}")


def _merge_into(config: BcComposeConfig, updates: dict[str, object]) -> None:
    for section_name, section_updates in updates.items():
        if section_name not in config or not isinstance(section_updates, dict):
            logger.warning("Ignoring unknown settings section: %s", section_name)
            continue
        section = config[section_name]
        for key, value in section_updates.items():
            if key not in section:
                logger.warning("Ignoring unknown setting: %s.%s", section_name, key)
                continue
            if section[key] == value:
                logger.warning(MERGE_WARNING, f"{section_name}.{key}")
            section[key] = value


def load_pydantic_settings() -> BcComposeConfig:
    """Load and assemble configuration using Pydantic models.

    Reads the package-embedded ``bc_compose/config_tomls/settings.toml`` and
    validates it into the typed settings models.

    Returns:
        BcComposeConfig: Aggregated configuration ready for downstream use.
    """
    base = Path(str(impres.files("bc_compose")))
    cfg_dir = base / "config_tomls"

    settings_file = SettingsFile.model_validate(_load_toml(cfg_dir / "settings.toml"))

    return BcComposeConfig(
        tolerances=settings_file.tolerances,
        defaults=settings_file.defaults,
        cli=settings_file.cli,
    )
