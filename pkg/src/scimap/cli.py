"""Pipeline CLI: explicit stages with file handoffs, seeds, and run manifests."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .analysis import (
    build_map,
    correlate_distances,
    explained_variance_curve,
    export_map,
)
from .analysis.stats import write_scatter_csv
from .citegraph import build_graph, load_graph, pairwise_graph_distances, sample_pairs, save_graph
from .corpus import (
    Corpus,
    SampleConfig,
    SynthConfig,
    load_corpus,
    preprocess,
    sample,
    save_corpus,
    synth_corpus,
)
from .embedder import EmbedderConfig, embed_texts, load_store, planted_embed, save_store
from .errors import ConfigError, MissingArtifactError, ScimapError, ValidationError
from .geometry import classify_soft, load_centers, save_centers, subject_centers

MANIFEST_SUFFIX = ".manifest.json"


class RunContext:
    """Resolved configuration shared by every stage of one pipeline run."""

    def __init__(self, config: dict, seed: int, threads: int | None, force: bool, out_dir: Path):
        self.config = config
        self.seed = seed
        self.threads = threads
        self.force = force
        self.out_dir = out_dir
        canonical = json.dumps({"config": config, "seed": seed}, sort_keys=True)
        self.config_hash = hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def get(self, key: str, cli_value, default):
        if cli_value is not None:
            return cli_value
        return self.config.get(key, default)

    def path(self, key: str, cli_value, default_name: str) -> Path:
        value = self.get(key, cli_value, None)
        if value is not None:
            return Path(value)
        return self.out_dir / default_name

    def require_input(self, path: Path, produced_by: str) -> Path:
        if not path.exists():
            raise MissingArtifactError(f"missing input {path}; run 'scimap {produced_by}' first")
        manifest_path = Path(str(path) + MANIFEST_SUFFIX)
        if manifest_path.exists() and not self.force:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            if manifest.get("config_hash") != self.config_hash:
                raise ValidationError(
                    f"config hash mismatch for {path}: produced by a different config/seed; "
                    "rerun the upstream stage or pass --force"
                )
        return path

    def write_manifest(self, artifact: Path, command: str, *, inputs: dict, seeds: dict,
                       params: dict, counts: dict, started: float) -> None:
        manifest = {
            "command": command,
            "version": __version__,
            "config_hash": self.config_hash,
            "artifact": str(artifact),
            "inputs": {k: str(v) for k, v in inputs.items()},
            "seeds": seeds,
            "params": params,
            "counts": counts,
            "wall_time_s": time.perf_counter() - started,
        }
        Path(str(artifact) + MANIFEST_SUFFIX).write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _levels_arg(text: str) -> tuple[float, ...]:
    try:
        levels = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as err:
        raise ConfigError(f"bad levels {text!r}: expected comma-separated floats") from err
    if not levels:
        raise ConfigError("levels must not be empty")
    return levels


def cmd_synth(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    cfg = SynthConfig(
        topic_count=int(ctx.get("topics", args.topics, 5)),
        records_per_topic=int(ctx.get("per_topic", args.per_topic, 200)),
        dim=int(ctx.get("dim", args.dim, 64)),
        noise_sigma=float(ctx.get("noise_sigma", args.noise_sigma, 0.1)),
        edge_temperature=float(ctx.get("tau", args.tau, 0.2)),
        mean_out_degree=float(ctx.get("mean_out_degree", args.mean_out_degree, 5.0)),
        seed=ctx.seed,
    )
    result = synth_corpus(cfg)

    corpus_path = ctx.path("corpus_out", args.out_corpus, "corpus.jsonl")
    planted_path = ctx.path("planted_out", args.out_planted, "planted.embs")
    topics_path = ctx.path("topics_out", args.out_topics, "topics.json")
    save_corpus(result.corpus, corpus_path)
    save_store(planted_embed(result.corpus, result.planted), planted_path)
    _write_json(topics_path, result.topics)

    common = dict(
        inputs={},
        seeds={"synth": cfg.seed},
        params={
            "topics": cfg.topic_count,
            "per_topic": cfg.records_per_topic,
            "dim": cfg.dim,
            "noise_sigma": cfg.noise_sigma,
            "tau": cfg.edge_temperature,
            "mean_out_degree": cfg.mean_out_degree,
        },
        counts={"records": len(result.corpus)},
        started=started,
    )
    for path in (corpus_path, planted_path, topics_path):
        ctx.write_manifest(path, "synth", **common)
    print(f"synth: {len(result.corpus)} records -> {corpus_path}")
    return 0


def cmd_ingest(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    input_path = ctx.require_input(ctx.path("input", args.input, "corpus.jsonl"), "synth")
    min_chars = int(ctx.get("min_abstract_chars", args.min_abstract_chars, 100))
    corpus = load_corpus(input_path)
    kept, report = preprocess(corpus, min_abstract_chars=min_chars)

    out_path = ctx.path("clean_out", args.out, "clean.jsonl")
    report_path = ctx.path("report_out", args.report_out, "preprocess_report.json")
    save_corpus(kept, out_path)
    _write_json(report_path, report.to_json_obj())

    common = dict(
        inputs={"corpus": input_path},
        seeds={},
        params={"min_abstract_chars": min_chars},
        counts={"input": report.input_count, "kept": report.kept_count, "removed": report.removed_count},
        started=started,
    )
    for path in (out_path, report_path):
        ctx.write_manifest(path, "ingest", **common)
    print(f"ingest: kept {report.kept_count}/{report.input_count} -> {out_path}")
    return 0


def cmd_sample(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    input_path = ctx.require_input(ctx.path("input", args.input, "clean.jsonl"), "ingest")
    probability = float(ctx.get("sample_p", args.sample_p, 1e-3))
    seed = ctx.seed
    corpus = load_corpus(input_path)
    sampled = sample(corpus, SampleConfig(probability=probability, seed=seed))

    out_path = ctx.path("sample_out", args.out, "sampled.jsonl")
    save_corpus(sampled, out_path)
    ctx.write_manifest(
        out_path,
        "sample",
        inputs={"corpus": input_path},
        seeds={"sample": seed},
        params={"sample_p": probability},
        counts={"input": len(corpus), "sampled": len(sampled)},
        started=started,
    )
    print(f"sample: {len(sampled)}/{len(corpus)} records -> {out_path}")
    return 0


def cmd_embed(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    corpus_path = ctx.require_input(ctx.path("corpus", args.corpus, "clean.jsonl"), "ingest")
    corpus = load_corpus(corpus_path)
    provider = ctx.get("provider", args.provider, "mock")
    max_in_flight = int(ctx.get("max_in_flight", args.max_in_flight, 4))
    if ctx.threads is not None:
        max_in_flight = max(1, min(max_in_flight, ctx.threads))
    seed = ctx.seed
    cfg = EmbedderConfig(
        provider=provider,
        endpoint=ctx.get("endpoint", args.endpoint, "http://localhost:11434"),
        model=ctx.get("model", args.model, "mock-embed"),
        dim=int(ctx.get("dim", args.dim, 1024)),
        batch_size=int(ctx.get("batch_size", args.batch_size, 32)),
        max_in_flight=max_in_flight,
        timeout=float(ctx.get("timeout", args.timeout, 60.0)),
        retry_count=int(ctx.get("retry_count", args.retry_count, 2)),
        seed=seed,
    )

    inputs = {"corpus": corpus_path}
    if provider == "planted":
        planted_path = ctx.require_input(
            ctx.path("planted_store", args.planted_store, "planted.embs"), "synth"
        )
        inputs["planted_store"] = planted_path
        planted = {record_id: vector for record_id, vector in load_store(planted_path).items()}
        store = planted_embed(corpus, planted, model=cfg.model)
    else:
        texts = [(record.id, record.abstract) for record in corpus]
        store = embed_texts(cfg, texts)

    store_path = ctx.path("store_out", args.store_out, "store.embs")
    save_store(store, store_path)
    ctx.write_manifest(
        store_path,
        "embed",
        inputs=inputs,
        seeds={"embed": seed} if provider == "mock" else {},
        params={"provider": provider, "model": cfg.model, "batch_size": cfg.batch_size},
        counts={"vectors": len(store), "dim": store.dim},
        started=started,
    )
    print(f"embed: {len(store)} vectors (dim {store.dim}) -> {store_path}")
    return 0


def cmd_centers(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    store_path = ctx.require_input(ctx.path("store", args.store, "store.embs"), "embed")
    corpus_path = ctx.require_input(ctx.path("corpus", args.corpus, "clean.jsonl"), "ingest")
    exclude = tuple(s for s in (args.exclude_subjects or "").split(",") if s)
    store = load_store(store_path)
    corpus = load_corpus(corpus_path)
    centers = subject_centers(store, corpus, exclude_subjects=exclude)

    out_path = ctx.path("centers_out", args.out, "centers.embs")
    save_centers(centers, out_path, model=store.model)
    ctx.write_manifest(
        out_path,
        "centers",
        inputs={"store": store_path, "corpus": corpus_path},
        seeds={},
        params={"exclude_subjects": list(exclude)},
        counts={
            "subjects": len(centers),
            "omitted_subjects": len(centers.omitted_subjects),
            "records_without_vectors": centers.missing_vector_records,
        },
        started=started,
    )
    print(f"centers: {len(centers)} subjects -> {out_path}")
    return 0


def cmd_graph_build(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    corpus_path = ctx.require_input(ctx.path("corpus", args.corpus, "clean.jsonl"), "ingest")
    corpus = load_corpus(corpus_path)
    graph = build_graph(corpus)

    out_path = ctx.path("graph_out", args.out, "graph.cgr")
    save_graph(graph, out_path)
    ctx.write_manifest(
        out_path,
        "graph build",
        inputs={"corpus": corpus_path},
        seeds={},
        params={},
        counts={
            "nodes": graph.node_count,
            "edges": graph.edge_count,
            "dangling_references": graph.dangling_count,
        },
        started=started,
    )
    print(f"graph build: {graph.node_count} nodes, {graph.edge_count} edges -> {out_path}")
    return 0


def cmd_graph_dist(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    graph_path = ctx.require_input(ctx.path("graph", args.graph, "graph.cgr"), "graph build")
    graph = load_graph(graph_path)
    pairs_n = int(ctx.get("pairs_n", args.pairs_n, 10000))
    seed = ctx.seed
    mode = ctx.get("mode", args.mode, "undirected")

    pair_sample = sample_pairs(_ids_as_corpus(graph.ids), pairs_n, seed=seed)
    result = pairwise_graph_distances(graph, pair_sample, mode=mode)

    out_path = ctx.path("dist_out", args.out, "graph_distances.json")
    _write_json(
        out_path,
        {
            "pairs": [[a, b] for a, b in result.pairs],
            "distances": result.distances,
            "reachable_count": result.reachable_count,
            "unreachable_count": result.unreachable_count,
            "histogram": {str(k): v for k, v in result.histogram.items()},
            "seed": seed,
            "mode": mode,
        },
    )
    ctx.write_manifest(
        out_path,
        "graph dist",
        inputs={"graph": graph_path},
        seeds={"pairs": seed},
        params={"pairs_n": pairs_n, "mode": mode},
        counts={"reachable": result.reachable_count, "unreachable": result.unreachable_count},
        started=started,
    )
    print(
        f"graph dist: {result.reachable_count} reachable / "
        f"{result.unreachable_count} unreachable -> {out_path}"
    )
    return 0


def cmd_correlate(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    store_path = ctx.require_input(ctx.path("store", args.store, "store.embs"), "embed")
    graph_path = ctx.require_input(ctx.path("graph", args.graph, "graph.cgr"), "graph build")
    store = load_store(store_path)
    graph = load_graph(graph_path)
    pairs_n = int(ctx.get("pairs_n", args.pairs_n, 10000))
    seed = ctx.seed
    mode = ctx.get("mode", args.mode, "undirected")

    pair_sample = sample_pairs(_ids_as_corpus(graph.ids), pairs_n, seed=seed)
    report = correlate_distances(store, graph, pair_sample, mode=mode)

    out_path = ctx.path("correlate_out", args.out, "correlation.json")
    scatter_path = ctx.path("scatter_out", args.scatter_out, "scatter.csv")
    _write_json(out_path, report.to_json_obj())
    write_scatter_csv(report, scatter_path)
    common = dict(
        inputs={"store": store_path, "graph": graph_path},
        seeds={"pairs": seed},
        params={"pairs_n": pairs_n, "mode": mode},
        counts={"used": report.pair_count_used, "excluded": report.pair_count_excluded},
        started=started,
    )
    for path in (out_path, scatter_path):
        ctx.write_manifest(path, "correlate", **common)
    print(
        f"correlate: pcc={report.pcc:.4f} over {report.pair_count_used} pairs "
        f"({report.pair_count_excluded} unreachable excluded) -> {out_path}"
    )
    return 0


def cmd_pca(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    store_path = ctx.require_input(ctx.path("store", args.store, "store.embs"), "embed")
    store = load_store(store_path)
    limit = min(len(store) - 1, store.dim)
    up_to = int(ctx.get("up_to", args.up_to, min(64, limit)))

    curve = explained_variance_curve(store.matrix, up_to)
    out_path = ctx.path("pca_out", args.out, "variance_curve.json")
    csv_path = ctx.path("pca_csv_out", args.csv_out, "variance_curve.csv")
    _write_json(
        out_path,
        {"cumulative_ratios": [float(v) for v in curve], "up_to": up_to, "model": store.model},
    )
    with csv_path.open("w", encoding="utf-8", newline="") as fp:
        fp.write("k,cum_ratio\n")
        for i, value in enumerate(curve, start=1):
            fp.write(f"{i},{float(value)!r}\n")
    common = dict(
        inputs={"store": store_path},
        seeds={},
        params={"up_to": up_to},
        counts={"vectors": len(store), "dim": store.dim},
        started=started,
    )
    for path in (out_path, csv_path):
        ctx.write_manifest(path, "pca", **common)
    print(f"pca: cumulative ratio at {up_to} components = {curve[-1]:.4f} -> {out_path}")
    return 0


def cmd_map(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    store_path = ctx.require_input(ctx.path("store", args.store, "store.embs"), "embed")
    corpus_path = ctx.require_input(ctx.path("corpus", args.corpus, "clean.jsonl"), "ingest")
    store = load_store(store_path)
    corpus = load_corpus(corpus_path)

    levels = _levels_arg(ctx.get("levels", args.levels, "0.25,0.5,0.75"))
    min_members = int(ctx.get("min_members", args.min_members, 20))
    label_count = int(ctx.get("label_n", args.label_n, 25))
    grid_size = int(ctx.get("grid_size", args.grid_size, 200))
    bandwidth = ctx.get("bandwidth", args.bandwidth, None)
    bandwidth = float(bandwidth) if bandwidth is not None else None
    exclude = tuple(s for s in (args.exclude_subjects or "").split(",") if s)

    artifact = build_map(
        store,
        corpus,
        levels=levels,
        min_members=min_members,
        label_count=label_count,
        bandwidth=bandwidth,
        grid_size=grid_size,
        exclude_subjects=exclude,
    )
    base = ctx.path("map_out", args.out_base, "map")
    outputs = []
    for fmt in ("svg", "json", "csv"):
        out_path = base.with_suffix(f".{fmt}")
        export_map(artifact, fmt, out_path)
        outputs.append(out_path)
    common = dict(
        inputs={"store": store_path, "corpus": corpus_path},
        seeds={},
        params={
            "levels": list(levels),
            "min_members": min_members,
            "label_n": label_count,
            "grid_size": grid_size,
            "bandwidth": bandwidth,
        },
        counts={
            "points": len(artifact.point_ids),
            "subjects": len(artifact.centers),
            "subjects_with_contours": len(artifact.contours),
            "skipped_subjects": len(artifact.skipped_subjects),
        },
        started=started,
    )
    for path in outputs:
        ctx.write_manifest(path, "map", **common)
    print(f"map: {len(artifact.centers)} subjects, {len(artifact.contours)} with contours -> {base}.svg")
    return 0


def cmd_classify(ctx: RunContext, args) -> int:
    started = time.perf_counter()
    centers_path = ctx.require_input(ctx.path("centers", args.centers, "centers.embs"), "centers")
    centers = load_centers(centers_path)
    temperature = float(ctx.get("temperature", args.temperature, 0.05))

    if (args.id is None) == (args.text is None):
        raise ConfigError("classify needs exactly one of --id or --text")
    if args.id is not None:
        store_path = ctx.require_input(ctx.path("store", args.store, "store.embs"), "embed")
        store = load_store(store_path)
        if args.id not in store:
            raise ValidationError(f"record {args.id!r} not in store {store_path}")
        vector = store.get(args.id)
        query = {"id": args.id}
    else:
        seed = ctx.seed
        provider = ctx.get("provider", args.provider, "mock")
        cfg = EmbedderConfig(
            provider=provider,
            endpoint=ctx.get("endpoint", args.endpoint, "http://localhost:11434"),
            model=ctx.get("model", args.model, "mock-embed"),
            dim=centers.dim,
            batch_size=1,
            seed=seed,
        )
        store = embed_texts(cfg, [("query", args.text)])
        vector = store.get("query")
        query = {"text_chars": len(args.text)}

    label = classify_soft(vector, centers, temperature=temperature)
    result = {
        "probabilities": label.probabilities,
        "top": label.top,
        "temperature": temperature,
        "query": query,
    }
    output = json.dumps(result, sort_keys=True, indent=2)
    if args.out:
        out_path = Path(args.out)
        out_path.write_text(output + "\n", encoding="utf-8")
        ctx.write_manifest(
            out_path,
            "classify",
            inputs={"centers": centers_path},
            seeds={},
            params={"temperature": temperature},
            counts={"subjects": len(centers)},
            started=started,
        )
    else:
        print(output)
    return 0


def _ids_as_corpus(ids: list[str]) -> Corpus:
    from .corpus import Record

    return Corpus(Record(id=record_id) for record_id in ids)


def _add_global_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file; CLI flags override config keys")
    parser.add_argument("--seed", type=int, default=None, help="global seed (default 0)")
    parser.add_argument("--threads", type=int, default=None, help="cap on concurrent work")
    parser.add_argument("--force", action="store_true", help="skip config-hash checks on inputs")
    parser.add_argument("--out-dir", default=None, help="directory for default artifact paths")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scimap", description=__doc__)
    _add_global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic topic-structured corpus")
    p.add_argument("--topics", type=int, default=None)
    p.add_argument("--per-topic", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--mean-out-degree", type=float, default=None)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out-corpus", default=None)
    p.add_argument("--out-planted", default=None)
    p.add_argument("--out-topics", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="preprocess a JSONL corpus")
    p.add_argument("--input", default=None)
    p.add_argument("--min-abstract-chars", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--report-out", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sample", help="Bernoulli-subsample a corpus")
    p.add_argument("--input", default=None)
    p.add_argument("--sample-p", type=float, default=None)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("embed", help="embed abstracts into a vector store")
    p.add_argument("--corpus", default=None)
    p.add_argument("--provider", choices=("http", "mock", "planted"), default=None)
    p.add_argument("--endpoint", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--max-in-flight", type=int, default=None)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--retry-count", type=int, default=None)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="mock provider seed")
    p.add_argument("--planted-store", default=None)
    p.add_argument("--store-out", default=None)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("centers", help="compute weighted subject centers")
    p.add_argument("--store", default=None)
    p.add_argument("--corpus", default=None)
    p.add_argument("--exclude-subjects", default=None, help="comma-separated labels to drop")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_centers)

    p = sub.add_parser("graph", help="citation graph stages")
    graph_sub = p.add_subparsers(dest="graph_command", required=True)
    g = graph_sub.add_parser("build", help="build the citation graph from a corpus")
    g.add_argument("--corpus", default=None)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_graph_build)
    g = graph_sub.add_parser("dist", help="hop distances over sampled record pairs")
    g.add_argument("--graph", default=None)
    g.add_argument("--pairs-n", type=int, default=None)
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--mode", choices=("undirected", "directed"), default=None)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_graph_dist)

    p = sub.add_parser("correlate", help="embedding vs graph distance correlation")
    p.add_argument("--store", default=None)
    p.add_argument("--graph", default=None)
    p.add_argument("--pairs-n", type=int, default=None)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--mode", choices=("undirected", "directed"), default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--scatter-out", default=None)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("pca", help="explained-variance curve of the store")
    p.add_argument("--store", default=None)
    p.add_argument("--up-to", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--csv-out", default=None)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("map", help="2D projection with per-subject KDE contours")
    p.add_argument("--store", default=None)
    p.add_argument("--corpus", default=None)
    p.add_argument("--levels", default=None, help="comma-separated mass levels")
    p.add_argument("--min-members", type=int, default=None)
    p.add_argument("--label-n", type=int, default=None)
    p.add_argument("--grid-size", type=int, default=None)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--exclude-subjects", default=None)
    p.add_argument("--out-base", default=None, help="basename for map.{svg,json,csv}")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("classify", help="soft subject probabilities for a record or text")
    p.add_argument("--centers", default=None)
    p.add_argument("--store", default=None)
    p.add_argument("--id", default=None)
    p.add_argument("--text", default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--provider", choices=("http", "mock"), default=None)
    p.add_argument("--endpoint", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_classify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = {}
        if args.config:
            config_path = Path(args.config)
            if not config_path.exists():
                raise ConfigError(f"config file {config_path} not found")
            config = tomllib.loads(config_path.read_text(encoding="utf-8"))
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        out_dir = Path(args.out_dir if args.out_dir is not None else config.get("out_dir", "."))
        out_dir.mkdir(parents=True, exist_ok=True)
        ctx = RunContext(
            config=config, seed=seed, threads=args.threads, force=args.force, out_dir=out_dir
        )
        return args.func(ctx, args)
    except ScimapError as err:
        payload = {"error": type(err).__name__, "message": str(err)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 2 if isinstance(err, (ConfigError, MissingArtifactError)) else 1
    except OSError as err:
        payload = {"error": type(err).__name__, "message": str(err)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
