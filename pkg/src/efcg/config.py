"""TOML configuration: one file with [generator], [judge], [embedding],
[expansion] and [pairs] sections. Endpoint secrets never live in the file;
they arrive via EFCG_LLM_TOKEN / EFCG_EMBED_TOKEN."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .clients import EMBED_TOKEN_ENV, LLM_TOKEN_ENV, EndpointConfig
from .errors import SchemaError
from .expansion import ExpansionConfig
from .pairs import PairConfig

_KNOWN_SECTIONS = {"generator", "judge", "embedding", "expansion", "pairs"}


@dataclass(frozen=True)
class Config:
    """Everything a pipeline stage needs, parsed and validated."""

    generator: EndpointConfig | None = None
    judge: EndpointConfig | None = None
    embedding: EndpointConfig | None = None
    expansion: ExpansionConfig = ExpansionConfig()
    pairs: PairConfig = PairConfig()


def _endpoint(section: dict[str, Any], name: str, token_env: str) -> EndpointConfig:
    allowed = {"base_url", "model", "temperature", "max_tokens", "timeout", "retries"}
    unknown = set(section) - allowed
    if unknown:
        raise SchemaError(f"unknown keys in [{name}]: {sorted(unknown)}")
    if "base_url" not in section:
        raise SchemaError(f"[{name}] needs base_url")
    return EndpointConfig(token_env=token_env, **section)


def load_config(path: str | Path) -> Config:
    """Parse and validate a TOML config file. Unknown sections or keys fail fast."""
    with open(path, "rb") as handle:
        try:
            raw = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError(f"invalid TOML in {path}: {exc}") from exc
    unknown = set(raw) - _KNOWN_SECTIONS
    if unknown:
        raise SchemaError(f"unknown config sections: {sorted(unknown)}")

    generator = judge = embedding = None
    if "generator" in raw:
        generator = _endpoint(raw["generator"], "generator", LLM_TOKEN_ENV)
    if "judge" in raw:
        judge = _endpoint(raw["judge"], "judge", LLM_TOKEN_ENV)
    if "embedding" in raw:
        embedding = _endpoint(raw["embedding"], "embedding", EMBED_TOKEN_ENV)

    try:
        expansion = ExpansionConfig(**raw.get("expansion", {}))
    except TypeError as exc:
        raise SchemaError(f"bad [expansion] section: {exc}") from None

    pairs_section = dict(raw.get("pairs", {}))
    try:
        pairs = PairConfig(generator=generator, judge=judge, **pairs_section)
    except TypeError as exc:
        raise SchemaError(f"bad [pairs] section: {exc}") from None

    return Config(
        generator=generator,
        judge=judge,
        embedding=embedding,
        expansion=expansion,
        pairs=pairs,
    )
