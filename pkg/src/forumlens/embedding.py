"""Embedding providers: hashed test vectors, precomputed files, and a remote service.

All providers return one fixed-dimension vector per paragraph, in input
order. Russian paragraphs are embedded from their translated text so that
both sub-corpora live in the same (English) embedding space.
"""

from __future__ import annotations

import hashlib
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import requests

from .ingest import Paragraph


class ProviderKind(Enum):
    FILE = "file"
    HASH = "hash"
    REMOTE = "remote"


class ZeroVectorError(ValueError):
    pass


class MissingVectorsError(KeyError):
    def __init__(self, missing_ids: Sequence[str]):
        self.missing_ids = list(missing_ids)
        super().__init__(f"no vectors for paragraph ids: {', '.join(self.missing_ids)}")


class RemoteProviderError(RuntimeError):
    """Raised when the remote embedding service fails; retriable per batch."""

    def __init__(self, message: str, batch_index: int, retriable: bool = True):
        super().__init__(f"batch {batch_index}: {message}")
        self.batch_index = batch_index
        self.retriable = retriable


@dataclass(frozen=True)
class ProviderConfig:
    kind: ProviderKind
    dimension: int | None = None  # hash only
    seed: int | None = None  # hash only
    endpoint: str | None = None  # remote only
    path: str | None = None  # file only
    max_in_flight: int = 4
    batch_size: int = 64

    def __post_init__(self) -> None:
        required = {
            ProviderKind.HASH: ("dimension", "seed"),
            ProviderKind.REMOTE: ("endpoint",),
            ProviderKind.FILE: ("path",),
        }[self.kind]
        for name in ("dimension", "seed", "endpoint", "path"):
            value = getattr(self, name)
            if name in required and value is None:
                raise ValueError(f"{self.kind.value} provider requires {name}")
            if name not in required and value is not None:
                raise ValueError(f"{self.kind.value} provider does not take {name}")
        if self.kind is ProviderKind.HASH and self.dimension < 8:
            raise ValueError("hash embedder needs dimension >= 8")


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    paragraph_ref: str


def normalize(v):
    """Scale a vector to unit L2 norm. Rejects zero vectors."""
    if isinstance(v, EmbeddingVector):
        return EmbeddingVector(values=normalize(v.values), paragraph_ref=v.paragraph_ref)
    arr = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize a zero vector")
    return arr / norm


def _token_feature(token: str, dimension: int, seed: int) -> tuple[int, float]:
    digest = hashlib.blake2b(f"{seed}:{token}".encode("utf-8"), digest_size=9).digest()
    bucket = int.from_bytes(digest[:8], "big") % dimension
    sign = 1.0 if digest[8] & 1 else -1.0
    return bucket, sign


def hash_embed(text: str, dimension: int, seed: int = 0) -> np.ndarray:
    """Deterministic token-level feature hashing with sign hashing.

    Each whitespace token is hashed (with the seed) to a bucket and a sign;
    contributions accumulate and the result is L2-normalized. Texts sharing
    most tokens land close in cosine; token-disjoint texts are near
    orthogonal apart from hash collisions.
    """
    if dimension < 8:
        raise ValueError("dimension must be >= 8")
    tokens = text.split()
    if not tokens:
        raise ValueError("cannot embed empty text")
    acc = np.zeros(dimension, dtype=np.float64)
    for token in tokens:
        bucket, sign = _token_feature(token, dimension, seed)
        acc[bucket] += sign
    return normalize(acc)


class _HashEmbedder:
    """hash_embed with a per-run token cache; equality of (text, seed, dim)
    implies equality of output."""

    def __init__(self, dimension: int, seed: int):
        self.dimension = dimension
        self.seed = seed
        self._cache: dict[str, tuple[int, float]] = {}

    def embed(self, text: str) -> np.ndarray:
        tokens = text.split()
        if not tokens:
            raise ValueError("cannot embed empty text")
        acc = np.zeros(self.dimension, dtype=np.float64)
        for token in tokens:
            feature = self._cache.get(token)
            if feature is None:
                feature = _token_feature(token, self.dimension, self.seed)
                self._cache[token] = feature
            acc[feature[0]] += feature[1]
        return normalize(acc)


def embed_batch(
    paragraphs: Sequence[Paragraph], config: ProviderConfig
) -> list[EmbeddingVector]:
    """Embed a batch of paragraphs with the configured provider.

    Output order matches input order and every vector has the provider's
    dimension. Russian paragraphs are embedded from translated_text.
    """
    if not paragraphs:
        raise ValueError("embed_batch needs at least one paragraph")
    texts = [p.analysis_text() for p in paragraphs]
    ids = [p.paragraph_id for p in paragraphs]

    if config.kind is ProviderKind.HASH:
        embedder = _HashEmbedder(config.dimension, config.seed)
        rows = [embedder.embed(t) for t in texts]
    elif config.kind is ProviderKind.FILE:
        _, table = read_vectors(config.path)
        missing = [pid for pid in ids if pid not in table]
        if missing:
            raise MissingVectorsError(missing)
        rows = [table[pid] for pid in ids]
    else:
        rows = _embed_remote(texts, config)

    dims = {len(row) for row in rows}
    if len(dims) != 1:
        raise ValueError(f"provider returned mixed dimensions: {sorted(dims)}")
    return [EmbeddingVector(values=np.asarray(row, dtype=np.float64), paragraph_ref=pid)
            for row, pid in zip(rows, ids)]


def _embed_remote(texts: list[str], config: ProviderConfig) -> list[np.ndarray]:
    session = requests.Session()
    batches = [texts[i:i + config.batch_size] for i in range(0, len(texts), config.batch_size)]

    def fetch(item: tuple[int, list[str]]) -> list[np.ndarray]:
        index, batch = item
        try:
            response = session.post(
                f"{config.endpoint.rstrip('/')}/embed",
                json={"texts": batch},
                timeout=120,
            )
            response.raise_for_status()
            payload = response.json()
            vectors = [np.asarray(v, dtype=np.float64) for v in payload["vectors"]]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise RemoteProviderError(str(exc), batch_index=index) from exc
        if len(vectors) != len(batch):
            raise RemoteProviderError(
                f"expected {len(batch)} vectors, got {len(vectors)}",
                batch_index=index,
                retriable=False,
            )
        return vectors

    with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
        results = list(pool.map(fetch, enumerate(batches)))
    return [vector for batch in results for vector in batch]


def check_remote_health(endpoint: str, timeout: float = 10.0) -> dict:
    """GET /health on the embedding service; returns the parsed payload."""
    response = requests.get(f"{endpoint.rstrip('/')}/health", timeout=timeout)
    response.raise_for_status()
    payload = response.json()
    if payload.get("status") != "ok":
        raise RemoteProviderError(f"service unhealthy: {payload}", batch_index=-1)
    return payload


def vectors_matrix(vectors: Sequence[EmbeddingVector]) -> np.ndarray:
    return np.stack([v.values for v in vectors])


# ---------------------------------------------------------------------------
# Precomputed-vector file format: header "dim=D", then one record per line of
# "paragraph_id v1 ... vD" with space-separated decimal floats.

def write_vectors(vectors: Sequence[EmbeddingVector], path: str | Path) -> None:
    if not vectors:
        raise ValueError("nothing to write")
    dim = len(vectors[0].values)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"dim={dim}\n")
        for v in vectors:
            if any(ch.isspace() for ch in v.paragraph_ref):
                raise ValueError(f"paragraph id contains whitespace: {v.paragraph_ref!r}")
            if len(v.values) != dim:
                raise ValueError("mixed dimensions in vector batch")
            coords = " ".join(repr(float(x)) for x in v.values)
            f.write(f"{v.paragraph_ref} {coords}\n")


def read_vectors(path: str | Path) -> tuple[int, dict[str, np.ndarray]]:
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if not header.startswith("dim="):
            raise ValueError(f"bad vector-file header: {header!r}")
        dim = int(header[4:])
        table: dict[str, np.ndarray] = {}
        for line in f:
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise ValueError(
                    f"record for {parts[0]!r} has {len(parts) - 1} coordinates, expected {dim}"
                )
            table[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
    return dim, table
