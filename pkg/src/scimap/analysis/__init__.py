"""Statistical and spectral analyses over embeddings and the citation graph."""

from .density import HdrContours, kde_density, kde_hdr_contours
from .mapping import MapArtifact, build_map, export_map
from .pca import PcaModel, explained_variance_curve, pca_fit, project_2d
from .stats import (
    CorrelationReport,
    DispersionScore,
    RankedPair,
    correlate_distances,
    distant_similarity_pairs,
    interdisciplinarity_score,
    pearson,
)

__all__ = [
    "CorrelationReport",
    "DispersionScore",
    "HdrContours",
    "MapArtifact",
    "PcaModel",
    "RankedPair",
    "build_map",
    "correlate_distances",
    "distant_similarity_pairs",
    "explained_variance_curve",
    "export_map",
    "interdisciplinarity_score",
    "kde_density",
    "kde_hdr_contours",
    "pca_fit",
    "pearson",
    "project_2d",
]
