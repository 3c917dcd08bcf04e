"""Run configuration: a small key/value file plus provenance hashing.

Configs are either a JSON object or a flat `key = value` file (one pair
per line, `#` comments, values parsed as JSON literals with bare
strings allowed). Every artifact a run writes embeds the config hash
and the seed so outputs can be traced back to their exact settings.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

logger = logging.getLogger(__name__)

PATH_KEYS = (
    "events",
    "corpus",
    "lexicon",
    "baseline_lexicon",
    "labels",
    "labels_a",
    "labels_b",
    "blocklist",
    "attrs",
    "pair_attrs",
    "cache",
    "script",
    "extra_keywords",
    "gazetteer_countries",
    "admin1",
    "cities",
    "links",
)


@dataclass
class PipelineConfig:
    values: dict[str, object] = field(default_factory=dict)
    source: Path | None = None

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text("utf-8")
        stripped = text.lstrip()
        if stripped.startswith("{"):
            try:
                values = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON config: {exc}") from None
            if not isinstance(values, dict):
                raise ConfigError(f"{path}: config must be an object")
        else:
            values = _parse_flat(text, path)
        return cls(values=values, source=path)

    def get(self, key: str, default: object = None) -> object:
        return self.values.get(key, default)

    def require(self, key: str) -> object:
        if key not in self.values:
            raise ConfigError(f"missing config key {key!r}")
        return self.values[key]

    def config_sha(self) -> str:
        canonical = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def validate_paths(self) -> None:
        """Every path-valued key must point at an existing file or dir."""
        for key in PATH_KEYS:
            value = self.values.get(key)
            if isinstance(value, str) and value and not Path(value).exists():
                raise ConfigError(f"config key {key!r}: path does not exist: {value}")


def _parse_flat(text: str, path: Path) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected `key = value`")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        try:
            values[key] = json.loads(raw)
        except json.JSONDecodeError:
            values[key] = raw
    return values


def run_meta(config: PipelineConfig | None, seed: int) -> dict[str, object]:
    """The provenance header embedded in every output artifact."""
    sha = config.config_sha() if config is not None else hashlib.sha256(b"{}").hexdigest()
    return {"config_sha": sha, "seed": seed}


def meta_comment(meta: dict[str, object]) -> str:
    """Provenance as a `#` comment line for CSV/text artifacts."""
    parts = " ".join(f"{k}={meta[k]}" for k in sorted(meta))
    return f"# {parts}"
