import json
from pathlib import Path
from typing import Dict, Optional

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.exceptions import ConfigurationError
from app.models import RunConfig


class Settings(BaseSettings):
    """Application configuration settings"""

    model_config = SettingsConfigDict(env_prefix="DIFFEO_", env_file=".env")

    # Computation defaults
    threads: int = 1
    default_order: int = 8
    default_trials: int = 20
    default_seed: int = 42

    # Kinematic sampling: numerators uniform in [-bound, bound], denominator 1
    kinematic_bound: int = 1_000_000
    max_resamples: int = 100

    # Tree routes get slow quickly; verify caps them here
    max_tree_legs: int = 6
    # Enumerating trees without evaluating them stays cheap one order further
    max_tree_count_legs: int = 7

    # Logging configuration
    log_level: str = "WARNING"
    json_logging: bool = True

    # Server configuration
    host: str = "127.0.0.1"
    port: int = 8000
    api_prefix: str = "/api/v1"
    title: str = "diffeo-trees"
    description: str = (
        "Tree amplitudes of field diffeomorphisms and their generating functions"
    )
    version: str = "1.0.0"


# Global settings instance
settings = Settings()


def worker_count(requested: Optional[int] = None) -> int:
    """Threads to use: the request, capped by DIFFEO_THREADS."""
    cap = max(1, settings.threads)
    if requested is None:
        return cap
    return max(1, min(requested, cap))


def load_run_config(path: Optional[str], overrides: Dict[str, object]) -> RunConfig:
    """
    Build a RunConfig from an optional JSON file plus command-line overrides

    Args:
        path: JSON file holding a RunConfig, or None
        overrides: values given explicitly on the command line (None entries skipped)

    Returns:
        Validated RunConfig
    """
    data: Dict[str, object] = {
        "order": settings.default_order,
        "trials": settings.default_trials,
        "seed": settings.default_seed,
    }
    if path:
        try:
            data.update(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError("config", f"cannot read {path}: {e}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError("config", str(e))
