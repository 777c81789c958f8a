"""Text embedding behind a provider contract, plus the vector math
used by retrieval.

Two providers: a remote HTTP provider (OpenAI-style embeddings endpoint)
and a deterministic token-hashing embedder so every test runs offline.
All vectors are unit-normalized before they leave this module, so cosine
similarity downstream reduces to a dot product.
"""

from __future__ import annotations

import hashlib
import math
import os
import re
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import requests

from .errors import ProviderError

DEFAULT_TEST_DIM = 64
_HASH_SEED = b"adjudicator-embed-v1"


class ProviderKind(str, Enum):
    REMOTE = "REMOTE"
    DETERMINISTIC_TEST = "DETERMINISTIC_TEST"


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    provider_kind: ProviderKind = ProviderKind.DETERMINISTIC_TEST
    model_name: str = "token-hash"
    endpoint: str = ""
    dim: int = DEFAULT_TEST_DIM
    timeout: float = 30.0
    max_retries: int = 2

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("embedding dim must be positive")
        if self.provider_kind is ProviderKind.REMOTE and not self.endpoint:
            raise ValueError("remote provider requires an endpoint")

    @property
    def fingerprint(self) -> str:
        return f"{self.provider_kind.value}:{self.model_name}:{self.dim}"


def l2_norm(values) -> float:
    return math.sqrt(sum(x * x for x in values))


def normalize(values) -> tuple[float, ...]:
    norm = l2_norm(values)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return tuple(x / norm for x in values)


def cosine_similarity(a, b) -> float:
    """Cosine of two vectors; symmetric by construction."""
    a = tuple(a)
    b = tuple(b)
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    na = l2_norm(a)
    nb = l2_norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity is undefined for the zero vector")
    # Summing a*b element products keeps dot(a,b) == dot(b,a) exactly.
    dot = sum(x * y for x, y in zip(a, b))
    return dot / (na * nb)


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), key=_HASH_SEED, digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


def _deterministic_embed(text: str, dim: int) -> tuple[float, ...]:
    counts = [0.0] * dim
    tokens = _TOKEN_RE.findall(text.lower())
    if not tokens:
        # Blank-ish text still embeds: a reserved bucket keeps the vector nonzero.
        counts[_bucket("", dim)] = 1.0
    for token in tokens:
        counts[_bucket(token, dim)] += 1.0
    return normalize(counts)


def _remote_embed(text: str, config: EmbeddingProviderConfig) -> tuple[float, ...]:
    endpoint = config.endpoint or os.environ.get("EMBED_ENDPOINT", "")
    api_key = os.environ.get("EMBED_API_KEY", "")
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    last_error: Optional[Exception] = None
    for attempt in range(config.max_retries + 1):
        try:
            resp = requests.post(
                endpoint,
                json={"model": config.model_name, "input": [text]},
                headers=headers,
                timeout=config.timeout,
            )
            if resp.status_code >= 500:
                last_error = ProviderError(f"embedding endpoint returned {resp.status_code}", status=resp.status_code)
                time.sleep(min(2**attempt * 0.1, 2.0))
                continue
            if resp.status_code != 200:
                raise ProviderError(f"embedding endpoint returned {resp.status_code}", status=resp.status_code)
            data = resp.json()["data"][0]["embedding"]
            if len(data) != config.dim:
                raise ProviderError(
                    f"provider returned dim {len(data)}, config declares {config.dim}"
                )
            return normalize(float(x) for x in data)
        except (requests.RequestException, KeyError, IndexError) as exc:
            last_error = exc
            time.sleep(min(2**attempt * 0.1, 2.0))
    raise ProviderError(f"embedding request failed after retries: {last_error}")


def embed_text(text: str, config: EmbeddingProviderConfig) -> tuple[float, ...]:
    """Embed one text; unit-normalized, length == config.dim."""
    if not text or not text.strip():
        raise ValueError("cannot embed empty text")
    if config.provider_kind is ProviderKind.DETERMINISTIC_TEST:
        return _deterministic_embed(text, config.dim)
    return _remote_embed(text, config)
