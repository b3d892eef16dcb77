from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Optional

CONFIG_ENV = "UAST_TAINT_CONFIG"
CONFIG_FILE = "yasa.config.json"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    max_call_depth: int = 10
    loop_unroll_bound: int = 3
    path_merge_cap: int = 8
    handlers_enabled: bool = True

    def __post_init__(self) -> None:
        for name in ("max_call_depth", "loop_unroll_bound", "path_merge_cap"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.handlers_enabled, bool):
            raise ConfigError("handlersEnabled must be a boolean")

    def with_overrides(self, **overrides: Any) -> "AnalysisConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_json(self) -> dict:
        return {_CAMEL[k]: v for k, v in asdict(self).items()}

    @classmethod
    def from_json(cls, data: dict) -> "AnalysisConfig":
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(_SNAKE)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**{_SNAKE[k]: v for k, v in data.items()})


_CAMEL = {
    "max_call_depth": "maxCallDepth",
    "loop_unroll_bound": "loopUnrollBound",
    "path_merge_cap": "pathMergeCap",
    "handlers_enabled": "handlersEnabled",
}
_SNAKE = {v: k for k, v in _CAMEL.items()}
assert set(_CAMEL) == {f.name for f in fields(AnalysisConfig)}


def load_config(root: Optional[str] = None) -> AnalysisConfig:
    """Config from ``$UAST_TAINT_CONFIG``, else ``<root>/yasa.config.json``, else defaults."""
    path = os.environ.get(CONFIG_ENV)
    if not path and root is not None:
        candidate = os.path.join(root, CONFIG_FILE) if os.path.isdir(root) else None
        if candidate and os.path.isfile(candidate):
            path = candidate
    if not path:
        return AnalysisConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return AnalysisConfig.from_json(data)
