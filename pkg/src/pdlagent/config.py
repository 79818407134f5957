"""Run configuration: a flat key=value file plus environment credentials.

Config file format (UTF-8, one entry per line):

    # comments and blank lines are ignored
    openai_base_url = https://api.example.com/v1
    openai_api_key_env = OPENAI_API_KEY
    model = gpt-4o
    max_identical_api_calls = 3
    max_total_turns = 20
    max_policy_retries_per_turn = 3
    enabled_pre = dependency
    enabled_post = dependency,api_repetition,conversation_length

Credentials are never stored in the file; `openai_api_key_env` names the
environment variable that holds the key.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from .controllers import ControllerConfig


def load_config(path: Union[str, Path, None]) -> dict[str, str]:
    if path is None:
        return {}
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _split_ids(value: Optional[str]) -> Optional[frozenset[str]]:
    if value is None:
        return None
    parts = [p.strip() for p in value.split(",") if p.strip()]
    return frozenset(parts)


def controller_config_from(
    config: dict[str, str],
    max_identical_api_calls: Optional[int] = None,
    max_total_turns: Optional[int] = None,
    max_policy_retries_per_turn: Optional[int] = None,
    enabled_pre: Optional[str] = None,
    enabled_post: Optional[str] = None,
) -> ControllerConfig:
    """Resolve the controller config: defaults < config file < CLI flags."""
    cfg = ControllerConfig()
    file_overrides = {}
    if "max_identical_api_calls" in config:
        file_overrides["max_identical_api_calls"] = int(config["max_identical_api_calls"])
    if "max_total_turns" in config:
        file_overrides["max_total_turns"] = int(config["max_total_turns"])
    if "max_policy_retries_per_turn" in config:
        file_overrides["max_policy_retries_per_turn"] = int(config["max_policy_retries_per_turn"])
    if "enabled_pre" in config:
        file_overrides["enabled_pre"] = _split_ids(config["enabled_pre"])
    if "enabled_post" in config:
        file_overrides["enabled_post"] = _split_ids(config["enabled_post"])
    cfg = cfg.with_overrides(**file_overrides)
    return cfg.with_overrides(
        max_identical_api_calls=max_identical_api_calls,
        max_total_turns=max_total_turns,
        max_policy_retries_per_turn=max_policy_retries_per_turn,
        enabled_pre=_split_ids(enabled_pre),
        enabled_post=_split_ids(enabled_post),
    )


def resolve_backend_spec(spec: Optional[str], config: dict[str, str]) -> Optional[object]:
    """Turn a CLI backend flag into a backend spec, honoring config defaults."""
    if spec is None:
        spec = config.get("backend")
    if spec is None:
        return None
    if spec.startswith("openai"):
        _, _, model = spec.partition(":")
        return {
            "kind": "openai",
            "model": model or config.get("model", "gpt-4o"),
            "base_url": config.get("openai_base_url"),
            "api_key_env": config.get("openai_api_key_env", "OPENAI_API_KEY"),
        }
    return spec
