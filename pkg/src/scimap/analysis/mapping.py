"""Assemble and export the 2D map: projected records, subject centers, KDE contours."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ..corpus import Corpus
from ..embedder import EmbeddingStore
from ..errors import DegenerateDataError, ValidationError
from ..geometry import subject_centers
from .density import DEFAULT_GRID_SIZE, DEFAULT_LEVELS, DEFAULT_MIN_POINTS, kde_hdr_contours
from .pca import pca_fit, project_2d

DEFAULT_LABEL_COUNT = 25

# Fixed palette cycled by subject order; map styling is intentionally plain.
_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a",
)


@dataclass
class MapArtifact:
    """Everything needed to render the map, in plain arrays and dicts."""

    point_ids: list[str]
    points: np.ndarray                                  # (n, 2)
    centers: dict[str, tuple[float, float]]
    contours: dict[str, dict[float, list[np.ndarray]]]  # subject -> level -> polylines
    labels: list[str]
    levels: tuple[float, ...]
    skipped_subjects: dict[str, str] = field(default_factory=dict)


def build_map(
    store: EmbeddingStore,
    corpus: Corpus,
    levels: tuple[float, ...] = DEFAULT_LEVELS,
    min_members: int = DEFAULT_MIN_POINTS,
    label_count: int = DEFAULT_LABEL_COUNT,
    bandwidth: float | None = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    exclude_subjects: Iterable[str] = (),
) -> MapArtifact:
    """Project records with PCA, place subject centers, and draw per-subject HDR contours.

    Subjects below min_members, or degenerate for KDE, are skipped with a
    notice instead of failing the map.
    """
    if len(store) < 3:
        raise ValidationError("need at least 3 embedded records to build a map")
    model = pca_fit(store.matrix, k=2)
    projected = project_2d(model, store)
    point_ids = list(store.ids)
    points = np.array([projected[i] for i in point_ids], dtype=np.float64)

    centers = subject_centers(store, corpus, exclude_subjects=exclude_subjects)
    centers_2d = {}
    for subject in centers.subjects:
        x, y = (centers.center(subject) - model.mean) @ model.components[:2].T
        centers_2d[subject] = (float(x), float(y))

    member_points: dict[str, list[int]] = {subject: [] for subject in centers.subjects}
    for record in corpus:
        if record.id not in store:
            continue
        row = store.row_of(record.id)
        for subject in record.subjects:
            if subject in member_points:
                member_points[subject].append(row)

    contours: dict[str, dict[float, list[np.ndarray]]] = {}
    skipped: dict[str, str] = {}
    for subject in centers.subjects:
        rows = member_points[subject]
        if len(rows) < min_members:
            skipped[subject] = f"only {len(rows)} members, need {min_members}"
            continue
        try:
            hdr = kde_hdr_contours(
                points[rows],
                levels=levels,
                bandwidth=bandwidth,
                grid_size=grid_size,
                min_points=min_members,
            )
        except DegenerateDataError as err:
            skipped[subject] = str(err)
            continue
        contours[subject] = hdr.contours

    by_size = sorted(centers.subjects, key=lambda s: (-centers.stats(s)[1], s))
    return MapArtifact(
        point_ids=point_ids,
        points=points,
        centers=centers_2d,
        contours=contours,
        labels=by_size[:label_count],
        levels=tuple(levels),
        skipped_subjects=skipped,
    )


def export_map(artifact: MapArtifact, fmt: str, path: str | Path) -> None:
    """Write the map as svg, json, or csv. Identical artifacts produce identical bytes."""
    if fmt == "svg":
        Path(path).write_text(_render_svg(artifact), encoding="utf-8")
    elif fmt == "json":
        Path(path).write_text(
            json.dumps(_json_obj(artifact), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    elif fmt == "csv":
        Path(path).write_text(_render_csv(artifact), encoding="utf-8")
    else:
        raise ValidationError(f"unknown map format {fmt!r}, expected svg, json, or csv")


def _level_key(level: float) -> str:
    return f"{level:g}"


def _json_obj(artifact: MapArtifact) -> dict:
    return {
        "levels": [float(level) for level in artifact.levels],
        "points": {i: [float(x), float(y)] for i, (x, y) in zip(artifact.point_ids, artifact.points)},
        "centers": {s: [float(x), float(y)] for s, (x, y) in artifact.centers.items()},
        "contours": {
            subject: {
                _level_key(level): [polyline.tolist() for polyline in polylines]
                for level, polylines in by_level.items()
            }
            for subject, by_level in artifact.contours.items()
        },
        "labels": list(artifact.labels),
        "skipped_subjects": dict(artifact.skipped_subjects),
    }


def _render_csv(artifact: MapArtifact) -> str:
    lines = ["kind,name,level,part,x,y"]
    for record_id, (x, y) in zip(artifact.point_ids, artifact.points):
        lines.append(f"point,{record_id},,,{x!r},{y!r}")
    for subject, (x, y) in artifact.centers.items():
        lines.append(f"center,{subject},,,{x!r},{y!r}")
    for subject, by_level in artifact.contours.items():
        for level in artifact.levels:
            for part, polyline in enumerate(by_level.get(level, [])):
                for x, y in polyline:
                    lines.append(f"contour,{subject},{_level_key(level)},{part},{x!r},{y!r}")
    return "\n".join(lines) + "\n"


def _render_svg(artifact: MapArtifact, size: float = 1000.0) -> str:
    """SVG 1.1 document: contour paths, center dots, selected labels."""
    if len(artifact.points):
        xs = artifact.points[:, 0]
        ys = artifact.points[:, 1]
        x_lo, x_hi = float(xs.min()), float(xs.max())
        y_lo, y_hi = float(ys.min()), float(ys.max())
    elif artifact.centers:
        xs = [x for x, _ in artifact.centers.values()]
        ys = [y for _, y in artifact.centers.values()]
        x_lo, x_hi, y_lo, y_hi = min(xs), max(xs), min(ys), max(ys)
    else:
        x_lo = y_lo = 0.0
        x_hi = y_hi = 1.0
    span = max(x_hi - x_lo, y_hi - y_lo, 1e-9)
    pad = 0.05 * span

    def sx(x: float) -> float:
        return (x - x_lo + pad) / (span + 2 * pad) * size

    def sy(y: float) -> float:
        # SVG y axis points down; flip so larger y plots higher.
        return size - (y - y_lo + pad) / (span + 2 * pad) * size

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:g}" height="{size:g}" '
        f'viewBox="0 0 {size:g} {size:g}">',
        f'<rect width="{size:g}" height="{size:g}" fill="white"/>',
    ]
    subject_order = list(artifact.centers.keys())
    color_of = {s: _PALETTE[i % len(_PALETTE)] for i, s in enumerate(subject_order)}

    for subject in subject_order:
        by_level = artifact.contours.get(subject)
        if not by_level:
            continue
        color = color_of[subject]
        for level in artifact.levels:
            for polyline in by_level.get(level, []):
                d = "M " + " L ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in polyline)
                parts.append(
                    f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1" '
                    f'opacity="{1.0 - 0.8 * level:.2f}"/>'
                )
    for subject in subject_order:
        x, y = artifact.centers[subject]
        parts.append(
            f'<circle cx="{sx(x):.3f}" cy="{sy(y):.3f}" r="3" fill="{color_of[subject]}"/>'
        )
    for subject in artifact.labels:
        if subject not in artifact.centers:
            continue
        x, y = artifact.centers[subject]
        parts.append(
            f'<text x="{sx(x) + 5:.3f}" y="{sy(y) - 5:.3f}" font-size="11" '
            f'font-family="sans-serif">{_xml_escape(subject)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _xml_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
