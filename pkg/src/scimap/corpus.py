"""Publication records: JSONL ingest, preprocessing filters, seeded sampling, synthetic corpora."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError, DuplicateIdError, ParseError, ValidationError

# JSONL field names are part of the external interface; do not rename.
RECORD_FIELDS = ("id", "title", "abstract", "year", "authors", "journal", "subjects", "references")

# Removal reasons are attributed by the first matching rule, in this order.
REMOVAL_RULE_ORDER = ("id", "title", "year", "authors", "references", "journal", "abstract-length")

DEFAULT_MIN_ABSTRACT_CHARS = 100


@dataclass
class Record:
    """One publication."""

    id: str
    title: str = ""
    abstract: str = ""
    year: int | None = None
    authors: list[str] = field(default_factory=list)
    journal: str = ""
    subjects: list[str] = field(default_factory=list)
    references: list[str] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "abstract": self.abstract,
            "year": self.year,
            "authors": list(self.authors),
            "journal": self.journal,
            "subjects": list(self.subjects),
            "references": list(self.references),
        }


class Corpus:
    """Insertion-ordered collection of records with a unique-id index."""

    def __init__(self, records: Iterable[Record] = ()):
        self._records: list[Record] = []
        self._index: dict[str, int] = {}
        for record in records:
            self.add(record)

    def add(self, record: Record) -> None:
        if record.id in self._index:
            raise DuplicateIdError(f"duplicate record id: {record.id!r}")
        self._index[record.id] = len(self._records)
        self._records.append(record)

    def get(self, record_id: str) -> Record:
        return self._records[self._index[record_id]]

    def ids(self) -> list[str]:
        return [r.id for r in self._records]

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self._records)


@dataclass
class PreprocessReport:
    """Tally of records removed by the preprocessing rules."""

    input_count: int
    removed_count: int
    kept_count: int
    removal_reasons: dict[str, int]

    def to_json_obj(self) -> dict:
        return {
            "input_count": self.input_count,
            "removed_count": self.removed_count,
            "kept_count": self.kept_count,
            "removal_reasons": dict(self.removal_reasons),
        }


@dataclass
class SampleConfig:
    """Bernoulli subsampling parameters. The generator is PCG64, so samples reproduce across platforms."""

    probability: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ConfigError(f"sample probability must be in [0, 1], got {self.probability}")


@dataclass
class SynthConfig:
    """Parameters for the synthetic topic-structured corpus generator."""

    topic_count: int = 5
    records_per_topic: int = 200
    dim: int = 64
    noise_sigma: float = 0.1
    edge_temperature: float = 0.2
    mean_out_degree: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.topic_count < 1:
            raise ConfigError("topic_count must be >= 1")
        if self.dim < self.topic_count:
            raise ConfigError(
                f"dim ({self.dim}) must be >= topic_count ({self.topic_count}) for orthogonal anchors"
            )
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")
        if self.edge_temperature <= 0:
            raise ConfigError("edge_temperature must be positive")
        if self.mean_out_degree < 0:
            raise ConfigError("mean_out_degree must be nonnegative")


@dataclass
class SynthResult:
    """Synthetic corpus with its ground truth."""

    corpus: Corpus
    topics: dict[str, int]
    planted: dict[str, np.ndarray]
    dim: int


def parse_record(line: str, line_number: int | None = None) -> Record:
    """Parse one JSONL line into a Record.

    Missing optional fields become empty values; a present, nonempty id is required.
    """
    where = "" if line_number is None else f" at line {line_number}"
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as err:
        raise ParseError(f"malformed JSON{where}: {err.msg}") from err
    if not isinstance(obj, dict):
        raise ParseError(f"expected a JSON object{where}, got {type(obj).__name__}")

    record_id = obj.get("id")
    if record_id is None or str(record_id) == "":
        raise ValidationError(f"record{where} has no id")

    year = obj.get("year")
    if year is not None:
        try:
            year = int(year)
        except (TypeError, ValueError) as err:
            raise ValidationError(f"record {record_id!r}{where}: year is not an integer") from err

    def _str_list(key: str) -> list[str]:
        value = obj.get(key) or []
        if not isinstance(value, list):
            raise ValidationError(f"record {record_id!r}{where}: {key} must be a list")
        return [str(v) for v in value]

    return Record(
        id=str(record_id),
        title=str(obj.get("title") or ""),
        abstract=str(obj.get("abstract") or ""),
        year=year,
        authors=_str_list("authors"),
        journal=str(obj.get("journal") or ""),
        subjects=_str_list("subjects"),
        references=_str_list("references"),
    )


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL corpus, one record per line. Blank lines are ignored."""
    corpus = Corpus()
    with Path(path).open("r", encoding="utf-8") as fp:
        for line_number, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            corpus.add(parse_record(line, line_number))
    return corpus


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as canonical JSONL (sorted keys, byte-stable for identical input)."""
    with Path(path).open("w", encoding="utf-8") as fp:
        for record in corpus:
            fp.write(json.dumps(record.to_json_obj(), sort_keys=True, ensure_ascii=False) + "\n")


def _removal_reason(record: Record, min_abstract_chars: int) -> str | None:
    if not record.id:
        return "id"
    if not record.title.strip():
        return "title"
    if record.year is None:
        return "year"
    if not record.authors:
        return "authors"
    if not record.references:
        return "references"
    if not record.journal.strip():
        return "journal"
    # Strictly greater than the threshold, counted in characters (not bytes).
    if len(record.abstract) <= min_abstract_chars:
        return "abstract-length"
    return None


def preprocess(
    corpus: Corpus, min_abstract_chars: int = DEFAULT_MIN_ABSTRACT_CHARS
) -> tuple[Corpus, PreprocessReport]:
    """Drop records missing required metadata or with short abstracts.

    Each removed record is counted under exactly one reason, the first matching
    rule in REMOVAL_RULE_ORDER.
    """
    kept = Corpus()
    reasons = {reason: 0 for reason in REMOVAL_RULE_ORDER}
    for record in corpus:
        reason = _removal_reason(record, min_abstract_chars)
        if reason is None:
            kept.add(record)
        else:
            reasons[reason] += 1
    removed = sum(reasons.values())
    report = PreprocessReport(
        input_count=len(corpus),
        removed_count=removed,
        kept_count=len(kept),
        removal_reasons={k: v for k, v in reasons.items() if v},
    )
    return kept, report


def sample(corpus: Corpus, cfg: SampleConfig) -> Corpus:
    """Keep each record by an independent Bernoulli(p) draw from a seeded PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    draws = rng.random(len(corpus))
    return Corpus(record for record, u in zip(corpus, draws) if u < cfg.probability)


_ABSTRACT_FILLER = (
    "The study reports methods, data handling, and evaluation in sufficient detail "
    "to support downstream text processing. "
)


def _synth_abstract(record_id: str, topic: int) -> str:
    text = f"Synthetic abstract for record {record_id} on topic {topic}. {_ABSTRACT_FILLER}"
    while len(text) <= DEFAULT_MIN_ABSTRACT_CHARS:
        text += _ABSTRACT_FILLER
    return text


def synth_corpus(cfg: SynthConfig) -> SynthResult:
    """Generate a topic-structured corpus with planted unit embeddings and citation edges.

    Topic anchors are orthogonal basis vectors; each planted vector is
    normalize(anchor + sigma * gaussian). The probability that record i cites
    record j is proportional to exp(-cosine_distance(v_i, v_j) / temperature),
    scaled so each row's expected out-degree is mean_out_degree. Everything is
    drawn from one seeded PCG64 stream, so output is byte-reproducible.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n = cfg.topic_count * cfg.records_per_topic

    ids = [f"S{i:06d}" for i in range(n)]
    topic_of = np.repeat(np.arange(cfg.topic_count), cfg.records_per_topic)

    anchors = np.eye(cfg.topic_count, cfg.dim)
    vectors = anchors[topic_of] + cfg.noise_sigma * rng.standard_normal((n, cfg.dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    vectors32 = vectors.astype(np.float32)

    # Row-normalized citation probabilities; clamp keeps them valid when a few
    # weights dominate the row.
    unit = vectors32.astype(np.float64)
    unit /= np.linalg.norm(unit, axis=1, keepdims=True)
    cos_dist = np.clip(1.0 - unit @ unit.T, 0.0, 2.0)
    weights = np.exp(-cos_dist / cfg.edge_temperature)
    np.fill_diagonal(weights, 0.0)
    row_sums = weights.sum(axis=1)
    probs = np.zeros_like(weights)
    nonzero = row_sums > 0
    probs[nonzero] = np.minimum(1.0, cfg.mean_out_degree * weights[nonzero] / row_sums[nonzero, None])

    records = []
    planted: dict[str, np.ndarray] = {}
    topics: dict[str, int] = {}
    for i, record_id in enumerate(ids):
        topic = int(topic_of[i])
        cited = np.flatnonzero(rng.random(n) < probs[i])
        records.append(
            Record(
                id=record_id,
                title=f"Synthetic record {record_id}",
                abstract=_synth_abstract(record_id, topic),
                year=2000 + topic,
                authors=[f"Author {topic}"],
                journal=f"Journal of Topic {topic}",
                subjects=[f"topic-{topic:02d}"],
                references=[ids[j] for j in cited],
            )
        )
        planted[record_id] = vectors32[i]
        topics[record_id] = topic

    return SynthResult(corpus=Corpus(records), topics=topics, planted=planted, dim=cfg.dim)
