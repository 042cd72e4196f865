"""HTTP clients: an OpenAI-compatible chat-completions endpoint and the
embedding service.

Secrets never appear in config files; tokens are read from the environment
(EFCG_LLM_TOKEN for generation/judging, EFCG_EMBED_TOKEN for embeddings).
All clients retry transient failures and raise ClientError once retries are
exhausted.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import requests

from .errors import ClientError

LLM_TOKEN_ENV = "EFCG_LLM_TOKEN"
EMBED_TOKEN_ENV = "EFCG_EMBED_TOKEN"


@dataclass(frozen=True)
class EndpointConfig:
    """Where and how to reach one HTTP endpoint."""

    base_url: str
    model: str = ""
    temperature: float = 0.0
    max_tokens: int | None = None
    timeout: float = 60.0
    retries: int = 2
    token_env: str = LLM_TOKEN_ENV

    def headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.token_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers


def _post_json(
    url: str,
    payload: dict,
    config: EndpointConfig,
    backoff: float = 0.5,
) -> dict:
    last_error: Exception | None = None
    for attempt in range(config.retries + 1):
        if attempt:
            time.sleep(backoff * attempt)
        try:
            response = requests.post(
                url, json=payload, headers=config.headers(), timeout=config.timeout
            )
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code >= 500:
            last_error = ClientError(f"{url} returned {response.status_code}")
            continue
        if response.status_code != 200:
            raise ClientError(f"{url} returned {response.status_code}: {response.text[:500]}")
        try:
            return response.json()
        except ValueError as exc:
            raise ClientError(f"{url} returned non-JSON body") from exc
    raise ClientError(f"{url} failed after {config.retries + 1} attempts: {last_error}")


class ChatClient:
    """Minimal OpenAI-compatible chat-completions client."""

    def __init__(self, config: EndpointConfig):
        self.config = config

    def complete(self, prompt: str) -> str:
        """Send one user message, return the first choice's content."""
        payload: dict = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        if self.config.max_tokens is not None:
            payload["max_tokens"] = self.config.max_tokens
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        data = _post_json(url, payload, self.config)
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ClientError(f"malformed chat completion response: {data!r:.500}") from exc
        if not isinstance(content, str):
            raise ClientError("chat completion content is not a string")
        return content


class EmbeddingClient:
    """Batch embedding client: {"texts": [...]} -> {"vectors": [[...], ...]}.

    Batches run with at most max_inflight concurrent requests; results are
    reassembled in input order, so output is deterministic regardless of
    completion order. A length mismatch between texts and vectors is a hard
    error.
    """

    def __init__(self, config: EndpointConfig, batch_size: int = 64, max_inflight: int = 4):
        if batch_size < 1 or max_inflight < 1:
            raise ValueError("batch_size and max_inflight must be >= 1")
        self.config = config
        self.batch_size = batch_size
        self.max_inflight = max_inflight

    def _embed_batch(self, texts: Sequence[str]) -> list[list[float]]:
        data = _post_json(self.config.base_url, {"texts": list(texts)}, self.config)
        vectors = data.get("vectors")
        if not isinstance(vectors, list):
            raise ClientError("embedding response has no 'vectors' list")
        if len(vectors) != len(texts):
            raise ClientError(
                f"embedding response length mismatch: sent {len(texts)} texts, "
                f"got {len(vectors)} vectors"
            )
        return [[float(v) for v in vector] for vector in vectors]

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        if not texts:
            return []
        batches = [
            texts[start : start + self.batch_size]
            for start in range(0, len(texts), self.batch_size)
        ]
        if len(batches) == 1:
            return self._embed_batch(batches[0])
        with ThreadPoolExecutor(max_workers=self.max_inflight) as pool:
            results = list(pool.map(self._embed_batch, batches))
        return [vector for batch in results for vector in batch]
