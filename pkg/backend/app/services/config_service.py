"""
Experiment documents: flat KEY=VALUE text, one key per line, ``#`` comments.

Keys are case-insensitive and map one-to-one onto ``ExperimentConfig``
fields. ``emit_config`` writes the canonical form that ``parse_config``
reads back to an equal config.
"""

import io
import logging
from typing import Dict

from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.errors import ConfigError
from app.models.experiment import ExperimentConfig

logger = logging.getLogger(__name__)


def parse_config(text: str) -> ExperimentConfig:
    """Validate an experiment document; errors name the offending key."""
    raw = dotenv_values(stream=io.StringIO(text))
    data: Dict[str, str] = {}
    for key, value in raw.items():
        name = key.strip().lower()
        if value is None or not value.strip():
            raise ConfigError(name, "missing value")
        data[name] = value.strip()

    unknown = sorted(set(data) - set(ExperimentConfig.model_fields))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")

    try:
        config = ExperimentConfig(**data)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = ".".join(str(part) for part in first["loc"])
        if key:
            raise ConfigError(key, first["msg"]) from exc
        # cross-field errors carry their key in the context
        ctx = first.get("ctx") or {}
        raise ConfigError(ctx.get("key", "document"), ctx.get("reason", first["msg"])) from exc

    logger.debug(f"parsed experiment: sweep {config.sweep_name} over {len(config.sweep_values())} points")
    return config


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(config: ExperimentConfig) -> str:
    """Canonical document for ``config``."""
    lines = []
    for name in ExperimentConfig.model_fields:
        value = getattr(config, name)
        if name == "noise_dbm" and value is None:
            lines.append("NOISE_DBM=off")
            continue
        if value is None:
            continue
        lines.append(f"{name.upper()}={_format(value)}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())
