"""Run configuration: weights, chunking/LLM knobs, and provider settings,
loadable from a TOML or JSON file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .agents import DEFAULT_MIN_TERM_OCCURRENCES, DEFAULT_NARRATIVE_BLEND
from .backend import (
    DEFAULT_MAX_OUTPUT_TOKENS,
    DEFAULT_TEMPERATURE,
    ProviderSettings,
)
from .chunker import DEFAULT_MAX_TOKENS
from .coordinator import WeightVector


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a .toml or .json config file into a plain mapping."""
    p = Path(path)
    if p.suffix.lower() == ".json":
        return json.loads(p.read_text(encoding="utf-8"))
    with p.open("rb") as handle:
        return tomllib.load(handle)


@dataclass
class RunConfig:
    weights: WeightVector = field(default_factory=WeightVector)
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = DEFAULT_TEMPERATURE
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    min_term_occurrences: int = DEFAULT_MIN_TERM_OCCURRENCES
    narrative_blend: float = DEFAULT_NARRATIVE_BLEND
    bleu_smoothing: bool = True
    provider: ProviderSettings | None = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        weights_raw = data.get("weights", {})
        weights = WeightVector(
            terminology=float(weights_raw.get("terminology", 0.3)),
            narrative=float(weights_raw.get("narrative", 0.3)),
            style=float(weights_raw.get("style", 0.4)),
        )
        chunking = data.get("chunking", {})
        llm = data.get("llm", {})
        agents = data.get("agents", {})
        baselines = data.get("baselines", {})
        provider = None
        if "provider" in data:
            provider = ProviderSettings.from_mapping(data["provider"])
        return cls(
            weights=weights,
            max_tokens=int(chunking.get("max_tokens", DEFAULT_MAX_TOKENS)),
            temperature=float(llm.get("temperature", DEFAULT_TEMPERATURE)),
            max_output_tokens=int(llm.get("max_output_tokens",
                                          DEFAULT_MAX_OUTPUT_TOKENS)),
            min_term_occurrences=int(agents.get("min_term_occurrences",
                                                DEFAULT_MIN_TERM_OCCURRENCES)),
            narrative_blend=float(agents.get("narrative_blend",
                                             DEFAULT_NARRATIVE_BLEND)),
            bleu_smoothing=bool(baselines.get("smoothing", True)),
            provider=provider,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_mapping(load_config_file(path))

    def snapshot(self) -> dict[str, Any]:
        """JSON-safe snapshot recorded in report provenance (no secrets:
        the provider's key stays in its environment variable)."""
        snap: dict[str, Any] = {
            "weights": self.weights.as_dict(),
            "chunking": {"max_tokens": self.max_tokens},
            "llm": {"temperature": self.temperature,
                    "max_output_tokens": self.max_output_tokens},
            "agents": {"min_term_occurrences": self.min_term_occurrences,
                       "narrative_blend": self.narrative_blend},
            "baselines": {"smoothing": self.bleu_smoothing},
        }
        if self.provider is not None:
            snap["provider"] = {
                "endpoint": self.provider.endpoint,
                "model": self.provider.model,
                "api_key_env": self.provider.api_key_env,
                "max_concurrency": self.provider.max_concurrency,
                "retry": {
                    "max_attempts": self.provider.retry.max_attempts,
                    "base_delay_ms": self.provider.retry.base_delay_ms,
                },
            }
        return snap
