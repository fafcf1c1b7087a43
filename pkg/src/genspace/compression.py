"""Penultimate-layer embeddings and their PCA projection to two dimensions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateData, ShapeMismatch
from .nn.network import Network


@dataclass
class EmbeddingMatrix:
    values: np.ndarray
    level_ids: list[str]
    generators: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeMismatch("embedding matrix must be 2D")
        n = len(self.values)
        if not self.level_ids:
            self.level_ids = [str(i) for i in range(n)]
        if not self.generators:
            self.generators = [""] * n
        if len(self.level_ids) != n or len(self.generators) != n:
            raise ShapeMismatch("ids/generators are not aligned with rows")
        if not np.isfinite(self.values).all():
            raise DegenerateData("embedding matrix contains non-finite values")


@dataclass
class PcaModel:
    column_means: np.ndarray
    components: np.ndarray  # (k, cols); rows are orthonormal directions
    explained_variance_ratio: np.ndarray
    singular_values: np.ndarray

    def transform(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != self.column_means.shape[0]:
            raise ShapeMismatch(
                f"expected {self.column_means.shape[0]} columns, got {values.shape}")
        return (values - self.column_means) @ self.components.T

    def inverse_transform(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(coords) @ self.components + self.column_means


@dataclass(frozen=True)
class ProjectedPoint:
    level_id: str
    pc1: float
    pc2: float
    generator: str = ""


def _as_matrix(matrix) -> EmbeddingMatrix:
    if isinstance(matrix, EmbeddingMatrix):
        return matrix
    return EmbeddingMatrix(np.asarray(matrix, dtype=np.float64), [], [])


def pca_fit(matrix, k: int = 2) -> PcaModel:
    """Top-``k`` principal directions of the mean-centred matrix (via SVD).

    Each component's largest-magnitude entry is made positive so the fit is
    deterministic.
    """
    values = _as_matrix(matrix).values
    n, d = values.shape
    if n < 2:
        raise DegenerateData("PCA needs at least two rows")
    if not 1 <= k <= min(n - 1, d):
        raise ValueError(f"k={k} outside [1, min(rows - 1, cols)] = [1, {min(n - 1, d)}]")
    means = values.mean(axis=0)
    centred = values - means
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    total = float(s @ s)
    if total == 0.0 or s[0] <= 1e-12 * max(1.0, np.abs(values).max()):
        raise DegenerateData("all rows are identical; no variance to project")
    comps = vt[:k].copy()
    pivot = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(k), pivot])
    comps *= signs[:, None]
    return PcaModel(means, comps, (s[:k] ** 2) / total, s[:k].copy())


def project_2d(model: PcaModel, matrix, allow_1d: bool = False) -> list[ProjectedPoint]:
    if model.components.shape[0] < 2 and not allow_1d:
        raise ShapeMismatch("projection needs a model with at least two components")
    m = _as_matrix(matrix)
    coords = model.transform(m.values)
    if coords.shape[1] < 2:
        coords = np.column_stack([coords, np.zeros(len(coords))])
    return [ProjectedPoint(lid, float(a), float(b), gen)
            for lid, gen, (a, b) in zip(m.level_ids, m.generators, coords[:, :2])]


def extract_embedding(network: Network, level: np.ndarray) -> np.ndarray:
    level = np.asarray(level)
    if level.ndim != 3:
        raise ShapeMismatch(f"expected a single (H, W, C) level, got shape {level.shape}")
    return network.embed(level)[0]


def embedding_matrix(network: Network, levels: Sequence[np.ndarray],
                     level_ids: Sequence[str] = (), generators: Sequence[str] = ()) -> EmbeddingMatrix:
    # per-level passes keep each row independent of batch composition
    rows = [extract_embedding(network, t) for t in levels]
    return EmbeddingMatrix(np.stack(rows), list(level_ids), list(generators))


def cnn_dr(network: Network, levels: Sequence[np.ndarray], level_ids: Sequence[str] = (),
           generators: Sequence[str] = ()) -> tuple[list[ProjectedPoint], PcaModel]:
    """Embed each level with the trained network, then PCA to 2D."""
    return _fit_project(embedding_matrix(network, levels, level_ids, generators))


def vanilla_dr(levels: Sequence[np.ndarray], level_ids: Sequence[str] = (),
               generators: Sequence[str] = ()) -> tuple[list[ProjectedPoint], PcaModel]:
    """Baseline: PCA straight on row-major flattened one-hot encodings."""
    shapes = {np.shape(t) for t in levels}
    if len(shapes) > 1:
        raise ShapeMismatch(f"levels have mixed shapes {sorted(shapes)}")
    if len(levels) < 2:
        raise DegenerateData("need at least two levels")
    flat = np.stack([np.asarray(t, dtype=np.float64).reshape(-1) for t in levels])
    return _fit_project(EmbeddingMatrix(flat, list(level_ids), list(generators)))


def _fit_project(matrix: EmbeddingMatrix):
    # two rows only span one direction; pc2 is then identically 0
    n, d = matrix.values.shape
    model = pca_fit(matrix, min(2, n - 1, d))
    return project_2d(model, matrix, allow_1d=True), model
