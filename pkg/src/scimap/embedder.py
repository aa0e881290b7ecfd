"""Embedding providers (HTTP, mock, planted) and the binary vector store."""

from __future__ import annotations

import hashlib
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np
import requests

from .errors import (
    ConfigError,
    CorruptionError,
    DimensionMismatchError,
    FormatError,
    ProtocolError,
    TransportError,
    ValidationError,
)

STORE_MAGIC = b"EMBS"
STORE_VERSION = 1

PROVIDERS = ("http", "mock", "planted")


def l2_normalize(vector: np.ndarray) -> np.ndarray:
    """Return the unit-norm float32 copy of a vector (normalized in float64)."""
    v = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValidationError("cannot normalize a zero or non-finite vector")
    return (v / norm).astype(np.float32)


@dataclass
class EmbedderConfig:
    provider: str = "mock"
    endpoint: str = "http://localhost:11434"
    model: str = "mock-embed"
    dim: int = 1024
    batch_size: int = 32
    max_in_flight: int = 4
    timeout: float = 60.0
    retry_count: int = 2
    seed: int = 0  # mock provider only

    def __post_init__(self):
        if self.provider not in PROVIDERS:
            raise ConfigError(f"unknown provider {self.provider!r}, expected one of {PROVIDERS}")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.max_in_flight < 1:
            raise ConfigError("max_in_flight must be >= 1")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")


class EmbeddingStore:
    """Id-indexed matrix of float32 vectors with one shared dimension.

    Iteration order is insertion order; instances are treated as immutable
    once built.
    """

    def __init__(self, dim: int, model: str = ""):
        self.dim = dim
        self.model = model
        self.ids: list[str] = []
        self._index: dict[str, int] = {}
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple[str, np.ndarray]], model: str = "") -> "EmbeddingStore":
        store = cls(dim, model)
        for record_id, vector in pairs:
            store._add(record_id, vector)
        return store

    def _add(self, record_id: str, vector: np.ndarray) -> None:
        if record_id in self._index:
            raise ValidationError(f"duplicate id in store: {record_id!r}")
        v = np.asarray(vector, dtype=np.float32)
        if v.shape != (self.dim,):
            raise DimensionMismatchError(
                f"vector for {record_id!r} has shape {v.shape}, store dim is {self.dim}"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError(f"vector for {record_id!r} contains NaN or Inf")
        self._index[record_id] = len(self.ids)
        self.ids.append(record_id)
        self._rows.append(v)
        self._matrix = None

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            if self._rows:
                self._matrix = np.stack(self._rows)
            else:
                self._matrix = np.empty((0, self.dim), dtype=np.float32)
        return self._matrix

    def get(self, record_id: str) -> np.ndarray:
        return self._rows[self._index[record_id]]

    def row_of(self, record_id: str) -> int:
        return self._index[record_id]

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(zip(self.ids, self._rows))

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def __len__(self) -> int:
        return len(self.ids)


def mock_embed(seed: int, dim: int, text: str) -> np.ndarray:
    """Deterministic pseudo-random unit vector for a text.

    Hashes (seed, text) into a PCG64 stream and normalizes a gaussian draw,
    which is approximately uniform on the sphere.
    """
    if dim < 1:
        raise ConfigError("dim must be >= 1")
    digest = hashlib.sha256(f"{seed}|{text}".encode("utf-8")).digest()
    rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:16], "little")))
    return l2_normalize(rng.standard_normal(dim))


def _http_embed_batch(cfg: EmbedderConfig, session: requests.Session, batch_index: int, texts: list[str]) -> list[list[float]]:
    url = cfg.endpoint.rstrip("/") + "/api/embed"
    payload = {"model": cfg.model, "input": texts}
    last_error = "no attempt made"
    for _ in range(cfg.retry_count + 1):
        try:
            response = session.post(url, json=payload, timeout=cfg.timeout)
        except requests.RequestException as err:
            last_error = str(err)
            continue
        if response.status_code != 200:
            last_error = f"HTTP {response.status_code}"
            continue
        try:
            embeddings = response.json()["embeddings"]
        except (ValueError, KeyError) as err:
            raise ProtocolError(f"batch {batch_index}: malformed response body: {err}") from err
        if not isinstance(embeddings, list) or len(embeddings) != len(texts):
            raise ProtocolError(
                f"batch {batch_index}: expected {len(texts)} embeddings, got "
                f"{len(embeddings) if isinstance(embeddings, list) else type(embeddings).__name__}"
            )
        return embeddings
    raise TransportError(
        f"batch {batch_index} ({len(texts)} texts) failed after {cfg.retry_count + 1} attempts: {last_error}"
    )


def embed_texts(
    cfg: EmbedderConfig,
    texts: list[tuple[str, str]],
    planted: Mapping[str, np.ndarray] | None = None,
) -> EmbeddingStore:
    """Embed (id, text) pairs into a unit-norm store.

    Vectors are re-normalized client-side regardless of provider behavior.
    HTTP batches run up to max_in_flight at a time; a failed batch fails the
    whole operation, so no partial store ever escapes.
    """
    if not texts:
        raise ValidationError("texts must be nonempty")
    seen = set()
    for record_id, _ in texts:
        if record_id in seen:
            raise ValidationError(f"duplicate id in embed request: {record_id!r}")
        seen.add(record_id)

    if cfg.provider == "mock":
        vectors = [mock_embed(cfg.seed, cfg.dim, text) for _, text in texts]
        return EmbeddingStore.from_pairs(cfg.dim, zip([i for i, _ in texts], vectors), model=cfg.model)

    if cfg.provider == "planted":
        if planted is None:
            raise ConfigError("planted provider requires a planted vector mapping")
        rows = []
        for record_id, _ in texts:
            if record_id not in planted:
                raise ValidationError(f"no planted vector for record {record_id!r}")
            rows.append((record_id, l2_normalize(planted[record_id])))
        dim = rows[0][1].shape[0]
        return EmbeddingStore.from_pairs(dim, rows, model=cfg.model)

    # http
    batches = [texts[i : i + cfg.batch_size] for i in range(0, len(texts), cfg.batch_size)]
    results: list[list[list[float]] | None] = [None] * len(batches)
    with requests.Session() as session:
        with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
            futures = {
                pool.submit(_http_embed_batch, cfg, session, i, [t for _, t in batch]): i
                for i, batch in enumerate(batches)
            }
            for future, i in futures.items():
                results[i] = future.result()

    dim: int | None = None
    pairs: list[tuple[str, np.ndarray]] = []
    for batch, embeddings in zip(batches, results):
        for (record_id, _), values in zip(batch, embeddings):
            vector = np.asarray(values, dtype=np.float64)
            if vector.ndim != 1:
                raise ProtocolError(f"embedding for {record_id!r} is not a flat vector")
            if dim is None:
                dim = int(vector.shape[0])
            elif vector.shape[0] != dim:
                raise ProtocolError(
                    f"dimension mismatch across responses: {vector.shape[0]} vs {dim} (id {record_id!r})"
                )
            pairs.append((record_id, l2_normalize(vector)))
    return EmbeddingStore.from_pairs(dim, pairs, model=cfg.model)


def planted_embed(corpus, planted: Mapping[str, np.ndarray], model: str = "planted") -> EmbeddingStore:
    """Build a store holding exactly the planted vectors for a synthetic corpus."""
    pairs = []
    dim: int | None = None
    for record in corpus:
        if record.id not in planted:
            raise ValidationError(f"record {record.id!r} has no planted vector")
        vector = np.asarray(planted[record.id], dtype=np.float32)
        if dim is None:
            dim = int(vector.shape[0])
        pairs.append((record.id, vector))
    if dim is None:
        raise ValidationError("corpus is empty")
    return EmbeddingStore.from_pairs(dim, pairs, model=model)


def save_store(store: EmbeddingStore, path: str | Path) -> None:
    """Write the store in the EMBS binary format (little-endian, bit-exact round-trip)."""
    with Path(path).open("wb") as fp:
        fp.write(STORE_MAGIC)
        fp.write(struct.pack("<IIQ", STORE_VERSION, store.dim, len(store)))
        model_bytes = store.model.encode("utf-8")
        fp.write(struct.pack("<H", len(model_bytes)))
        fp.write(model_bytes)
        for record_id, vector in store.items():
            id_bytes = record_id.encode("utf-8")
            fp.write(struct.pack("<H", len(id_bytes)))
            fp.write(id_bytes)
            fp.write(np.ascontiguousarray(vector, dtype="<f4").tobytes())


class _Reader:
    """Tracks the byte offset so truncation errors can name it."""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def read(self, count: int, what: str) -> bytes:
        if self.offset + count > len(self.data):
            raise CorruptionError(f"truncated file while reading {what}", offset=self.offset)
        chunk = self.data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def expect_end(self, what: str) -> None:
        if self.offset != len(self.data):
            raise CorruptionError(f"trailing bytes after {what}", offset=self.offset)


def load_store(path: str | Path) -> EmbeddingStore:
    """Read an EMBS file back into a store."""
    reader = _Reader(Path(path).read_bytes())
    magic = reader.read(4, "magic")
    if magic != STORE_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {STORE_MAGIC!r}")
    version, dim, count = struct.unpack("<IIQ", reader.read(16, "header"))
    if version != STORE_VERSION:
        raise FormatError(f"unsupported store version {version}")
    (model_len,) = struct.unpack("<H", reader.read(2, "model length"))
    model = reader.read(model_len, "model name").decode("utf-8")

    store = EmbeddingStore(dim, model)
    vector_bytes = 4 * dim
    for i in range(count):
        (id_len,) = struct.unpack("<H", reader.read(2, f"id length of entry {i}"))
        record_id = reader.read(id_len, f"id of entry {i}").decode("utf-8")
        raw = reader.read(vector_bytes, f"vector of entry {i}")
        vector = np.frombuffer(raw, dtype="<f4").copy()
        store._add(record_id, vector)
    reader.expect_end("last entry")
    return store
