"""Correlation of embedding vs graph distances, and combined distance measures."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..citegraph import CitationGraph, PairSample, bfs_distances, pairwise_graph_distances
from ..embedder import EmbeddingStore
from ..errors import DegenerateDataError, ValidationError

DISTANT_SIMILARITY_EPSILON = 1e-6


def pearson(xs, ys) -> float:
    """Two-pass Pearson product-moment correlation, clamped to [-1, 1]."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"inputs must be equal-length 1D sequences, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise ValidationError("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    denominator = np.sqrt(np.dot(dx, dx) * np.dot(dy, dy))
    if denominator == 0.0:
        raise DegenerateDataError("correlation undefined: an input has zero variance")
    return float(np.clip(np.dot(dx, dy) / denominator, -1.0, 1.0))


def _unit_rows(store: EmbeddingStore) -> np.ndarray:
    rows = store.matrix.astype(np.float64)
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateDataError("store contains a zero vector")
    return rows / norms


def _pair_embedding_distances(store: EmbeddingStore, pairs: list[tuple[str, str]]) -> np.ndarray:
    unit = _unit_rows(store)
    a = np.fromiter((store.row_of(p[0]) for p in pairs), dtype=np.int64, count=len(pairs))
    b = np.fromiter((store.row_of(p[1]) for p in pairs), dtype=np.int64, count=len(pairs))
    sims = np.einsum("ij,ij->i", unit[a], unit[b])
    return 1.0 - np.clip(sims, -1.0, 1.0)


@dataclass
class CorrelationReport:
    """PCC between embedding distance and hop distance over reachable pairs."""

    pcc: float
    pair_count_used: int
    pair_count_excluded: int
    scatter: list[tuple[float, int]]  # (embedding distance, hop distance)
    model: str

    def to_json_obj(self) -> dict:
        return {
            "pcc": self.pcc,
            "pair_count_used": self.pair_count_used,
            "pair_count_excluded": self.pair_count_excluded,
            "model": self.model,
            "scatter": [[e, h] for e, h in self.scatter],
        }


def correlate_distances(
    store: EmbeddingStore,
    graph: CitationGraph,
    sample: PairSample,
    mode: str = "undirected",
) -> CorrelationReport:
    """Compare cosine distances with hop distances over a pair sample.

    Unreachable pairs are excluded from the coefficient and counted, never
    assigned a stand-in distance.
    """
    graph_result = pairwise_graph_distances(graph, sample, mode=mode)
    embedding_distances = _pair_embedding_distances(store, sample.pairs)

    scatter = [
        (float(embedding_distances[i]), hops)
        for i, hops in enumerate(graph_result.distances)
        if hops is not None
    ]
    if len(scatter) < 2:
        raise DegenerateDataError(
            f"only {len(scatter)} reachable pairs; need at least 2 for a correlation"
        )
    pcc = pearson([e for e, _ in scatter], [h for _, h in scatter])
    return CorrelationReport(
        pcc=pcc,
        pair_count_used=len(scatter),
        pair_count_excluded=graph_result.unreachable_count,
        scatter=scatter,
        model=store.model,
    )


def write_scatter_csv(report: CorrelationReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fp:
        fp.write("emb_distance,hop_distance\n")
        for embedding_distance, hops in report.scatter:
            fp.write(f"{embedding_distance!r},{hops}\n")


@dataclass
class DispersionScore:
    """Interdisciplinarity of a record set: embedding spread over graph closeness."""

    embedding_dispersion: float
    mean_hop_distance: float | None
    score: float | None


def interdisciplinarity_score(
    record_ids: list[str],
    store: EmbeddingStore,
    graph: CitationGraph,
    mode: str = "undirected",
) -> DispersionScore:
    """dispersion / (1 + mean internal hop distance); higher = more interdisciplinary.

    Dispersion is the mean cosine distance of members to the set's mean
    direction. When no internal pair is reachable the score is undefined and
    reported as None alongside the dispersion.
    """
    if len(record_ids) < 2:
        raise ValidationError("record set must have at least 2 members")
    unit = _unit_rows(store)
    rows = unit[[store.row_of(i) for i in record_ids]]
    mean = rows.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0.0:
        raise DegenerateDataError("mean direction undefined (vectors cancel out)")
    dispersion = float(np.mean(1.0 - np.clip(rows @ (mean / norm), -1.0, 1.0)))

    hop_sum = 0
    hop_count = 0
    indices = [graph.index_of(i) for i in record_ids]
    for position, source_id in enumerate(record_ids[:-1]):
        from_source = bfs_distances(graph, source_id, mode=mode)
        for j in indices[position + 1 :]:
            hops = int(from_source[j])
            if hops >= 0:
                hop_sum += hops
                hop_count += 1
    if hop_count == 0:
        return DispersionScore(embedding_dispersion=dispersion, mean_hop_distance=None, score=None)
    mean_hop = hop_sum / hop_count
    return DispersionScore(
        embedding_dispersion=dispersion,
        mean_hop_distance=mean_hop,
        score=dispersion / (1.0 + mean_hop),
    )


@dataclass
class RankedPair:
    """One pair in the distant-similarity ranking."""

    a: str
    b: str
    hop_distance: int | None  # None = unreachable (ranks as infinite)
    embedding_distance: float
    score: float | None


def distant_similarity_pairs(
    store: EmbeddingStore,
    graph: CitationGraph,
    sample: PairSample,
    top_k: int,
    mode: str = "undirected",
) -> list[RankedPair]:
    """Pairs close in embedding space but far on the graph, best first.

    Reachable pairs rank by hop / (eps + embedding distance); unreachable
    pairs rank above all reachable ones, closest embeddings first. Ties keep
    input order.
    """
    graph_result = pairwise_graph_distances(graph, sample, mode=mode)
    embedding_distances = _pair_embedding_distances(store, sample.pairs)

    ranked = []
    for i, (a, b) in enumerate(sample.pairs):
        hops = graph_result.distances[i]
        emb = float(embedding_distances[i])
        score = None if hops is None else hops / (DISTANT_SIMILARITY_EPSILON + emb)
        ranked.append(RankedPair(a=a, b=b, hop_distance=hops, embedding_distance=emb, score=score))

    def sort_key(pair: RankedPair):
        if pair.score is None:
            return (0, pair.embedding_distance)
        return (1, -pair.score)

    return sorted(ranked, key=sort_key)[:top_k]
