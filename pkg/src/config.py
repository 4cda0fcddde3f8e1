import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from src.shared_models import InvalidInputError, JobConfig

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).resolve().parent.parent / "data" / "config" / "defaults.json"


@dataclass
class Settings:
    """Guard rails and default knobs, from defaults.json plus AINF_* environment overrides."""

    max_vars: int = 6
    max_order: int = 12
    default_order: int = 4
    default_arity: int = 5
    default_length: int = 3
    node_limit: int = 20000
    log_level: str = "WARNING"


def _int_env(name: str, fallback: int) -> int:
    value = os.environ.get(name)
    if value is None or value == "":
        return fallback
    try:
        return int(value)
    except ValueError as e:
        raise InvalidInputError(f"{name} must be an integer, got {value!r}") from e


def load_settings(path: Optional[Path] = None) -> Settings:
    path = Path(path) if path is not None else DEFAULTS_PATH
    load_dotenv()
    values = {}
    if path.exists():
        with open(path, "r") as f:
            values = json.load(f)
    else:
        logger.warning(f"Config file {path} not found, using built-in defaults")
    known = {k: v for k, v in values.items() if k in Settings.__dataclass_fields__}
    settings = Settings(**known)
    settings.max_vars = _int_env("AINF_MAX_VARS", settings.max_vars)
    settings.max_order = _int_env("AINF_MAX_ORDER", settings.max_order)
    settings.node_limit = _int_env("AINF_NODE_LIMIT", settings.node_limit)
    settings.log_level = os.environ.get("AINF_LOG_LEVEL", settings.log_level).upper()
    return settings


def validate_job_config(config: JobConfig, settings: Settings,
                        needs_potential: bool = False) -> None:
    """Guard rails on n and N, and K >= N for jobs that read disc potentials."""
    if needs_potential and config.arity < config.order:
        raise InvalidInputError(
            f"Arity cap {config.arity} must be at least the order {config.order} for this job"
        )
    if config.order < 1 or config.arity < 2 or config.length < 1:
        raise InvalidInputError("Order, arity cap and length cap must be positive")
    too_big = []
    if config.nvars is not None and config.nvars > settings.max_vars:
        too_big.append(f"n={config.nvars} > {settings.max_vars}")
    if config.order > settings.max_order:
        too_big.append(f"N={config.order} > {settings.max_order}")
    if too_big:
        if not config.force:
            raise InvalidInputError(f"Guard rail exceeded ({', '.join(too_big)}); use --force")
        logger.warning(f"Guard rail overridden with --force: {', '.join(too_big)}")
