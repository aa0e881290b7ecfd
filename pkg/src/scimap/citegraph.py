"""Corpus-internal citation graph in CSR form, with hop-distance queries."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import CorruptionError, DegenerateDataError, FormatError, ValidationError

GRAPH_MAGIC = b"CGR1"

UNREACHABLE = -1  # internal marker in distance arrays


def _csr_from_edges(n: int, sources: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Build (offsets, targets) with per-source sorted, deduplicated targets."""
    if len(sources) == 0:
        return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64)
    keys = sources.astype(np.int64) * n + targets.astype(np.int64)
    keys = np.unique(keys)
    sources = keys // n
    targets = keys % n
    counts = np.bincount(sources, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, targets.astype(np.int64)


class CitationGraph:
    """Directed citation edges stored as CSR; queried undirected by default."""

    def __init__(self, ids: list[str], offsets: np.ndarray, targets: np.ndarray, dangling_count: int = 0):
        self.ids = ids
        self._index = {record_id: i for i, record_id in enumerate(ids)}
        self.offsets = offsets
        self.targets = targets
        self.dangling_count = dangling_count
        self._undirected: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return int(len(self.targets))

    def index_of(self, record_id: str) -> int:
        if record_id not in self._index:
            raise ValidationError(f"unknown record id {record_id!r}")
        return self._index[record_id]

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def undirected_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Symmetrized adjacency, built once and cached."""
        if self._undirected is None:
            n = self.node_count
            sources = np.repeat(np.arange(n, dtype=np.int64), np.diff(self.offsets))
            both_src = np.concatenate([sources, self.targets])
            both_dst = np.concatenate([self.targets, sources])
            self._undirected = _csr_from_edges(n, both_src, both_dst)
        return self._undirected

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.offsets)


def build_graph(corpus: Corpus) -> CitationGraph:
    """One directed edge per in-corpus reference; dangling targets dropped and counted."""
    ids = corpus.ids()
    index = {record_id: i for i, record_id in enumerate(ids)}
    sources: list[int] = []
    targets: list[int] = []
    dangling = 0
    for i, record in enumerate(corpus):
        for ref in record.references:
            j = index.get(ref)
            if j is None:
                dangling += 1
            elif j != i:  # no self-loops
                sources.append(i)
                targets.append(j)
    offsets, target_array = _csr_from_edges(
        len(ids), np.asarray(sources, dtype=np.int64), np.asarray(targets, dtype=np.int64)
    )
    return CitationGraph(ids, offsets, target_array, dangling_count=dangling)


def _bfs(offsets: np.ndarray, targets: np.ndarray, source: int, n: int, stop_at: int | None = None) -> np.ndarray:
    """Level-synchronous BFS; returns hop distances with UNREACHABLE for unvisited nodes."""
    distances = np.full(n, UNREACHABLE, dtype=np.int64)
    distances[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        if stop_at is not None and distances[stop_at] >= 0:
            break
        level += 1
        starts = offsets[frontier]
        counts = offsets[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        # flat CSR gather of every frontier node's neighbor list
        flat = np.repeat(starts, counts) + (np.arange(total) - np.repeat(counts.cumsum() - counts, counts))
        neighbors = targets[flat]
        neighbors = neighbors[distances[neighbors] == UNREACHABLE]
        if neighbors.size == 0:
            break
        frontier = np.unique(neighbors)
        distances[frontier] = level
    return distances


def bfs_distances(graph: CitationGraph, source_id: str, mode: str = "undirected") -> np.ndarray:
    """Hop distances from one record to every node (UNREACHABLE where disconnected)."""
    source = graph.index_of(source_id)
    if mode == "undirected":
        offsets, targets = graph.undirected_csr()
    elif mode == "directed":
        offsets, targets = graph.offsets, graph.targets
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return _bfs(offsets, targets, source, graph.node_count)


def shortest_path_distance(graph: CitationGraph, a: str, b: str, mode: str = "undirected") -> int | None:
    """BFS hop count between two records, or None when unreachable."""
    ai = graph.index_of(a)
    bi = graph.index_of(b)
    if ai == bi:
        return 0
    if mode == "undirected":
        offsets, targets = graph.undirected_csr()
    elif mode == "directed":
        offsets, targets = graph.offsets, graph.targets
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    distances = _bfs(offsets, targets, ai, graph.node_count, stop_at=bi)
    hops = int(distances[bi])
    return None if hops == UNREACHABLE else hops


@dataclass
class PairSample:
    """Uniform record pairs (with replacement, distinct endpoints)."""

    pairs: list[tuple[str, str]]
    seed: int

    def __len__(self) -> int:
        return len(self.pairs)


def sample_pairs(corpus: Corpus, n: int, seed: int = 0) -> PairSample:
    """Draw n uniform pairs of distinct records from a seeded PCG64 stream."""
    ids = corpus.ids()
    if len(ids) < 2:
        raise DegenerateDataError(f"corpus has {len(ids)} records, need at least 2 to sample pairs")
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = []
    for _ in range(n):
        a = int(rng.integers(0, len(ids)))
        b = int(rng.integers(0, len(ids)))
        while b == a:
            b = int(rng.integers(0, len(ids)))
        pairs.append((ids[a], ids[b]))
    return PairSample(pairs=pairs, seed=seed)


@dataclass
class GraphDistanceResult:
    """Hop distance per sampled pair; None marks unreachable pairs."""

    pairs: list[tuple[str, str]]
    distances: list[int | None]
    reachable_count: int
    unreachable_count: int
    histogram: dict[int, int]


def pairwise_graph_distances(
    graph: CitationGraph, sample: PairSample, mode: str = "undirected"
) -> GraphDistanceResult:
    """Distances for all sampled pairs, one BFS per unique source."""
    by_source: dict[str, list[int]] = {}
    for position, (a, _) in enumerate(sample.pairs):
        by_source.setdefault(a, []).append(position)

    distances: list[int | None] = [None] * len(sample.pairs)
    for source_id, positions in by_source.items():
        from_source = bfs_distances(graph, source_id, mode=mode)
        for position in positions:
            hops = int(from_source[graph.index_of(sample.pairs[position][1])])
            distances[position] = None if hops == UNREACHABLE else hops

    histogram: dict[int, int] = {}
    unreachable = 0
    for hops in distances:
        if hops is None:
            unreachable += 1
        else:
            histogram[hops] = histogram.get(hops, 0) + 1
    return GraphDistanceResult(
        pairs=list(sample.pairs),
        distances=distances,
        reachable_count=len(distances) - unreachable,
        unreachable_count=unreachable,
        histogram=dict(sorted(histogram.items())),
    )


def save_graph(graph: CitationGraph, path: str | Path) -> None:
    """Write the CGR1 binary layout: header, CSR offsets/targets, id table."""
    n = graph.node_count
    target_dtype = "<u4" if n <= 0xFFFFFFFF else "<u8"
    with Path(path).open("wb") as fp:
        fp.write(GRAPH_MAGIC)
        fp.write(struct.pack("<QQ", n, graph.edge_count))
        fp.write(np.ascontiguousarray(graph.offsets, dtype="<u8").tobytes())
        fp.write(np.ascontiguousarray(graph.targets, dtype=target_dtype).tobytes())
        for record_id in graph.ids:
            id_bytes = record_id.encode("utf-8")
            fp.write(struct.pack("<H", len(id_bytes)))
            fp.write(id_bytes)


def load_graph(path: str | Path) -> CitationGraph:
    from .embedder import _Reader  # same offset-tracking reader

    reader = _Reader(Path(path).read_bytes())
    magic = reader.read(4, "magic")
    if magic != GRAPH_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {GRAPH_MAGIC!r}")
    node_count, edge_count = struct.unpack("<QQ", reader.read(16, "header"))
    offsets = np.frombuffer(
        reader.read(8 * (node_count + 1), "CSR offsets"), dtype="<u8"
    ).astype(np.int64)
    target_dtype, target_size = ("<u4", 4) if node_count <= 0xFFFFFFFF else ("<u8", 8)
    targets = np.frombuffer(
        reader.read(target_size * edge_count, "CSR targets"), dtype=target_dtype
    ).astype(np.int64)
    ids = []
    for i in range(node_count):
        (id_len,) = struct.unpack("<H", reader.read(2, f"id length of node {i}"))
        ids.append(reader.read(id_len, f"id of node {i}").decode("utf-8"))
    reader.expect_end("id table")
    if offsets[-1] != edge_count:
        raise CorruptionError("CSR offsets do not end at edge_count", offset=None)
    return CitationGraph(ids, offsets, targets)
