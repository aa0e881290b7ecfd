"""Embedding-based map of a publication corpus.

Pipeline pieces: corpus ingest and sampling, embedding providers and the
binary vector store, cosine-space subject geometry, the citation graph with
hop distances, and the statistical analyses and map exports built on top.
"""

from . import analysis, citegraph, corpus, embedder, geometry
from .errors import ScimapError

__version__ = "0.1.0"

__all__ = ["analysis", "citegraph", "corpus", "embedder", "geometry", "ScimapError", "__version__"]
