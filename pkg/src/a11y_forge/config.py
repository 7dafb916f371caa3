"""Engine configuration shared by the CLI and the LSP server.

Configuration comes from a TOML file (a11y-forge.toml by default), overridden
per-flag by front ends; the A11Y_FORGE_ENDPOINT environment variable overrides
the endpoint last.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .llm import GenerationParams, LiveProvider, ReplayProvider
from .prompts import TemplateSet
from .rules import CATALOG


class ConfigError(ValueError):
    pass


DEFAULT_PROMPT_BUDGET = 24000


@dataclass
class EngineConfig:
    enabled_rules: Optional[set[str]] = None  # None means the full catalog
    provider: str = "replay"
    endpoint: str = "http://127.0.0.1:11434"
    model: str = "codellama"
    temperature: float = 0.0
    seed: int = 0
    template_overrides: dict = field(default_factory=dict)
    dedupe: bool = True
    output_dir: Optional[Path] = None
    prompt_char_budget: int = DEFAULT_PROMPT_BUDGET
    fixtures_dirs: list = field(default_factory=list)
    debounce_ms: int = 300
    timeout: float = 60.0
    max_retries: int = 2

    def validate(self) -> "EngineConfig":
        if self.provider not in ("replay", "live"):
            raise ConfigError(f"unknown provider {self.provider!r} (expected replay or live)")
        if self.provider == "live" and not (self.endpoint and self.model):
            raise ConfigError("live provider requires endpoint and model")
        if self.provider == "replay" and not self.fixtures_dirs:
            raise ConfigError("replay provider requires at least one fixtures directory")
        if self.enabled_rules is not None:
            unknown = sorted(set(self.enabled_rules) - set(CATALOG))
            if unknown:
                raise ConfigError(f"unknown rule id(s): {', '.join(unknown)}")
        if self.prompt_char_budget <= 0:
            raise ConfigError("prompt_char_budget must be positive")
        return self

    def build_provider(self):
        if self.provider == "replay":
            return ReplayProvider([Path(d) for d in self.fixtures_dirs])
        return LiveProvider(self.endpoint, timeout=self.timeout, max_retries=self.max_retries)

    def build_templates(self) -> TemplateSet:
        return TemplateSet(self.template_overrides or None)

    def generation_params(self) -> GenerationParams:
        return GenerationParams(model=self.model, temperature=self.temperature, seed=self.seed)


_KEYS = {
    "enabled_rules": lambda v: set(v),
    "provider": str,
    "endpoint": str,
    "model": str,
    "temperature": float,
    "seed": int,
    "template_overrides": dict,
    "dedupe": bool,
    "output_dir": lambda v: Path(v),
    "prompt_char_budget": int,
    "fixtures_dirs": lambda v: [Path(x) for x in v],
    "debounce_ms": int,
    "timeout": float,
    "max_retries": int,
}


def config_from_dict(data: dict, base: Optional[EngineConfig] = None) -> EngineConfig:
    config = base or EngineConfig()
    updates = {}
    for key, value in data.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        updates[key] = _KEYS[key](value)
    return replace(config, **updates)


def load_config(path: Optional[str] = None) -> EngineConfig:
    """Load a11y-forge.toml when present; flags and env are layered on top."""
    config = EngineConfig()
    toml_path = Path(path) if path else Path("a11y-forge.toml")
    if toml_path.is_file():
        try:
            data = tomllib.loads(toml_path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{toml_path}: {exc}") from exc
        config = config_from_dict(data, config)
    elif path:
        raise ConfigError(f"config file not found: {path}")
    endpoint = os.environ.get("A11Y_FORGE_ENDPOINT")
    if endpoint:
        config = replace(config, endpoint=endpoint)
    return config
