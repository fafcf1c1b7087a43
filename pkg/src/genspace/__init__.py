"""Visualise the output spaces of tile-based level generators.

Levels are one-hot encoded, a CNN is trained to predict their behavioural
characteristics (BCs), and the penultimate-layer embeddings are projected to
2D with PCA.  Projection quality is scored by Spearman correlation between
pairwise 2D distances and pairwise BC differences.
"""

from .compression import (EmbeddingMatrix, PcaModel, ProjectedPoint, cnn_dr,
                          extract_embedding, pca_fit, project_2d, vanilla_dr)
from .corpus import (CorpusSample, LevelGrid, TileAlphabet, condense_tiles, one_hot_encode,
                     parse_boxoban, parse_mario, sample_even, split_train_test)
from .metrics import BCVector, compute_bcs
from .validation import (CorrelationReport, ExtremalPairs, PairTable, build_pair_table,
                         correlation_report, extremal_pairs, spearman)

__version__ = "0.1.0"

__all__ = [
    "BCVector", "CorpusSample", "CorrelationReport", "EmbeddingMatrix", "ExtremalPairs",
    "LevelGrid", "PairTable", "PcaModel", "ProjectedPoint", "TileAlphabet",
    "build_pair_table", "cnn_dr", "compute_bcs", "condense_tiles", "correlation_report",
    "extract_embedding", "extremal_pairs", "one_hot_encode", "parse_boxoban", "parse_mario",
    "pca_fit", "project_2d", "sample_even", "spearman", "split_train_test", "vanilla_dr",
]
