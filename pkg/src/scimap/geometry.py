"""Cosine-space primitives: distances, weighted subject centers, spread, soft labels."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import Corpus
from .embedder import EmbeddingStore, load_store, save_store
from .errors import DegenerateDataError, DimensionMismatchError, ValidationError

DEFAULT_TEMPERATURE = 0.05
DEFAULT_OUTLIER_QUANTILE = 0.95


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateDataError("cosine similarity undefined for zero vectors")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    return 1.0 - cosine_similarity(u, v)


class SubjectCenters:
    """Weighted mean vector per subject, kept raw (not renormalized).

    Unit-normalized copies are derived on demand for cosine queries. Weights
    follow the multi-label rule: a record with k subjects contributes 1/k to
    each of them.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.subjects: list[str] = []
        self._index: dict[str, int] = {}
        self._centers: list[np.ndarray] = []
        self.total_weights: list[float] = []
        self.member_counts: list[int] = []
        self.omitted_subjects: list[str] = []
        self.missing_vector_records: int = 0
        self._matrix: np.ndarray | None = None
        self._unit: np.ndarray | None = None

    def add(self, subject: str, center: np.ndarray, total_weight: float, member_count: int) -> None:
        if subject in self._index:
            raise ValidationError(f"duplicate subject {subject!r}")
        if total_weight <= 0 or member_count < 1:
            raise ValidationError(f"subject {subject!r} has no effective members")
        self._index[subject] = len(self.subjects)
        self.subjects.append(subject)
        self._centers.append(np.asarray(center, dtype=np.float64))
        self.total_weights.append(float(total_weight))
        self.member_counts.append(int(member_count))
        self._matrix = None
        self._unit = None

    def center(self, subject: str) -> np.ndarray:
        return self._centers[self._index[subject]]

    def stats(self, subject: str) -> tuple[float, int]:
        i = self._index[subject]
        return self.total_weights[i], self.member_counts[i]

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = (
                np.stack(self._centers) if self._centers else np.empty((0, self.dim))
            )
        return self._matrix

    def unit_matrix(self) -> np.ndarray:
        """Unit-normalized centers for cosine geometry."""
        if self._unit is None:
            matrix = self.matrix
            norms = np.linalg.norm(matrix, axis=1, keepdims=True)
            if np.any(norms == 0.0):
                bad = self.subjects[int(np.argmin(norms))]
                raise DegenerateDataError(f"subject {bad!r} has a zero center vector")
            self._unit = matrix / norms
        return self._unit

    def __contains__(self, subject: str) -> bool:
        return subject in self._index

    def __len__(self) -> int:
        return len(self.subjects)


def subject_centers(
    store: EmbeddingStore,
    corpus: Corpus,
    exclude_subjects: Iterable[str] = (),
) -> SubjectCenters:
    """Accumulate the weighted mean vector of every subject, in first-seen order.

    Records without a stored vector are skipped and counted; a subject whose
    members are all skipped is omitted and listed in omitted_subjects.
    """
    excluded = set(exclude_subjects)
    sums: dict[str, np.ndarray] = {}
    weights: dict[str, float] = {}
    counts: dict[str, int] = {}
    seen_order: list[str] = []

    missing = 0
    for record in corpus:
        subjects = [s for s in record.subjects if s not in excluded]
        if not subjects:
            continue
        for subject in subjects:
            if subject not in sums:
                seen_order.append(subject)
                sums[subject] = np.zeros(store.dim, dtype=np.float64)
                weights[subject] = 0.0
                counts[subject] = 0
        if record.id not in store:
            missing += 1
            continue
        weight = 1.0 / len(record.subjects)
        vector = store.get(record.id).astype(np.float64)
        for subject in subjects:
            sums[subject] += weight * vector
            weights[subject] += weight
            counts[subject] += 1

    centers = SubjectCenters(store.dim)
    centers.missing_vector_records = missing
    for subject in seen_order:
        if counts[subject] == 0:
            centers.omitted_subjects.append(subject)
            continue
        centers.add(subject, sums[subject] / weights[subject], weights[subject], counts[subject])
    return centers


@dataclass
class SubjectSpread:
    """Distance statistics of a subject's members around its (unit) center."""

    subject: str
    member_count: int
    mean_center_distance: float
    distance_quantiles: tuple[float, float, float, float]  # q25, q50, q75, q95
    outlier_ids: list[str]


def subject_spread(
    centers: SubjectCenters,
    store: EmbeddingStore,
    corpus: Corpus,
    outlier_quantile: float = DEFAULT_OUTLIER_QUANTILE,
) -> list[SubjectSpread]:
    """Per subject: member distances to the unit center, quantiles, and outliers.

    Outliers are members strictly beyond the outlier_quantile distance.
    """
    members: dict[str, list[str]] = {subject: [] for subject in centers.subjects}
    for record in corpus:
        if record.id not in store:
            continue
        for subject in record.subjects:
            if subject in centers:
                members[subject].append(record.id)

    unit = centers.unit_matrix()
    spreads = []
    for position, subject in enumerate(centers.subjects):
        ids = members[subject]
        if not ids:
            continue
        rows = np.stack([store.get(i) for i in ids]).astype(np.float64)
        distances = 1.0 - np.clip(rows @ unit[position], -1.0, 1.0)
        q25, q50, q75, q95 = np.quantile(distances, [0.25, 0.5, 0.75, 0.95])
        threshold = np.quantile(distances, outlier_quantile)
        outliers = [ids[i] for i in np.flatnonzero(distances > threshold)]
        spreads.append(
            SubjectSpread(
                subject=subject,
                member_count=len(ids),
                mean_center_distance=float(distances.mean()),
                distance_quantiles=(float(q25), float(q50), float(q75), float(q95)),
                outlier_ids=outliers,
            )
        )
    return spreads


def center_pairwise_distances(centers: SubjectCenters) -> tuple[list[str], np.ndarray]:
    """Symmetric cosine-distance matrix over unit-normalized centers."""
    if len(centers) < 2:
        raise DegenerateDataError("need at least 2 subjects for pairwise distances")
    unit = centers.unit_matrix()
    distances = 1.0 - np.clip(unit @ unit.T, -1.0, 1.0)
    distances = (distances + distances.T) / 2.0
    np.fill_diagonal(distances, 0.0)
    return list(centers.subjects), distances


@dataclass
class SoftLabel:
    """Probability distribution over subjects from a distance softmax."""

    probabilities: dict[str, float]
    temperature: float

    @property
    def top(self) -> str:
        best = max(self.probabilities.values())
        for subject, p in self.probabilities.items():
            if p == best:
                return subject
        raise ValueError("empty probabilities")


def classify_soft(
    vector: np.ndarray,
    centers: SubjectCenters,
    temperature: float = DEFAULT_TEMPERATURE,
) -> SoftLabel:
    """Soft subject assignment: p(S) proportional to exp(-distance(v, center_S) / T)."""
    if len(centers) == 0:
        raise DegenerateDataError("no centers to classify against")
    if temperature <= 0:
        raise ValidationError("temperature must be positive")
    v = np.asarray(vector, dtype=np.float64)
    if v.shape != (centers.dim,):
        raise DimensionMismatchError(f"query has shape {v.shape}, centers dim is {centers.dim}")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DegenerateDataError("cannot classify a zero vector")

    unit = centers.unit_matrix()
    distances = 1.0 - np.clip(unit @ (v / norm), -1.0, 1.0)
    logits = -distances / temperature
    logits -= logits.max()  # softmax stability
    weights = np.exp(logits)
    probabilities = weights / weights.sum()
    return SoftLabel(
        probabilities={s: float(p) for s, p in zip(centers.subjects, probabilities)},
        temperature=temperature,
    )


def save_centers(centers: SubjectCenters, path: str | Path, model: str = "") -> None:
    """Persist centers as an EMBS file (subjects as ids) plus a JSON sidecar."""
    store = EmbeddingStore.from_pairs(
        centers.dim,
        ((s, centers.center(s).astype(np.float32)) for s in centers.subjects),
        model=model,
    )
    save_store(store, path)
    sidecar = {
        "subjects": {
            s: {"total_weight": centers.total_weights[i], "member_count": centers.member_counts[i]}
            for i, s in enumerate(centers.subjects)
        },
        "omitted_subjects": list(centers.omitted_subjects),
        "missing_vector_records": centers.missing_vector_records,
    }
    Path(_sidecar_path(path)).write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_centers(path: str | Path) -> SubjectCenters:
    store = load_store(path)
    sidecar = json.loads(Path(_sidecar_path(path)).read_text(encoding="utf-8"))
    centers = SubjectCenters(store.dim)
    for subject, vector in store.items():
        stats = sidecar["subjects"][subject]
        centers.add(subject, vector.astype(np.float64), stats["total_weight"], stats["member_count"])
    centers.omitted_subjects = list(sidecar.get("omitted_subjects", []))
    centers.missing_vector_records = int(sidecar.get("missing_vector_records", 0))
    return centers


def _sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")
