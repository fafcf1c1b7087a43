"""How well 2D proximity tracks BC similarity.

For every pair of levels the Euclidean distance in the projection is paired
with the absolute difference of each BC, and the two lists are compared by
Spearman rank correlation.  Pairwise distances are not independent samples,
so the reported p values are indicative only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .compression import ProjectedPoint
from .errors import AlignmentError, LengthMismatch, TooFewSamples
from .metrics import BCVector


@dataclass
class PairTable:
    index_a: np.ndarray
    index_b: np.ndarray
    level_ids: list[str]
    distances: np.ndarray
    bc_names: tuple[str, ...]
    bc_diffs: np.ndarray  # (pairs, bcs)

    def __len__(self):
        return len(self.distances)

    def rows(self):
        for k in range(len(self)):
            yield (self.level_ids[self.index_a[k]], self.level_ids[self.index_b[k]],
                   float(self.distances[k]), tuple(float(v) for v in self.bc_diffs[k]))


@dataclass
class CorrelationReport:
    per_bc: list[tuple[str, float, float]]

    @property
    def average_rho(self) -> float:
        return float(np.mean([rho for _, rho, _ in self.per_bc]))

    def rho(self, bc: str) -> float:
        return next(r for name, r, _ in self.per_bc if name == bc)

    def p(self, bc: str) -> float:
        return next(p for name, _, p in self.per_bc if name == bc)


@dataclass(frozen=True)
class ExtremalPairs:
    closest: tuple[str, str, float]
    farthest: tuple[str, str, float]


def _coords(points: Sequence[ProjectedPoint]) -> np.ndarray:
    return np.array([[p.pc1, p.pc2] for p in points], dtype=np.float64).reshape(-1, 2)


def build_pair_table(points: Sequence[ProjectedPoint], bcs: Sequence[BCVector],
                     bc_ids: Sequence[str] | None = None) -> PairTable:
    """All unordered pairs ``i < j``; ``bc_ids`` (if given) must match the point ids."""
    if len(points) != len(bcs):
        raise AlignmentError(f"{len(points)} points but {len(bcs)} BC vectors")
    ids = [p.level_id for p in points]
    if bc_ids is not None and list(bc_ids) != ids:
        raise AlignmentError("BC vectors are not aligned with point ids")
    names = bcs[0].names if bcs else ()
    if any(b.names != names for b in bcs):
        raise AlignmentError("BC vectors disagree on BC names")
    xy = _coords(points)
    values = np.array([b.as_array() for b in bcs]).reshape(len(bcs), len(names))
    ia, ib = np.triu_indices(len(points), k=1)
    dist = np.hypot(*(xy[ia] - xy[ib]).T) if len(ia) else np.empty(0)
    diffs = np.abs(values[ia] - values[ib])
    return PairTable(ia, ib, ids, dist, tuple(names), diffs)


def rankdata(values) -> np.ndarray:
    return stats.rankdata(values, method="average")


def spearman(x, y) -> tuple[float, float]:
    """Spearman's rho with average ranks for ties and a two-sided t-test p value.

    A constant input gives ``(0.0, 1.0)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"lengths differ: {x.shape} vs {y.shape}")
    m = len(x)
    if m < 3:
        raise TooFewSamples(f"spearman needs at least 3 values, got {m}")
    rx = rankdata(x)
    ry = rankdata(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return 0.0, 1.0
    rho = float(dx @ dy) / math.sqrt(sxx * syy)
    rho = min(1.0, max(-1.0, rho))
    if abs(rho) == 1.0:
        return rho, 0.0
    t = rho * math.sqrt((m - 2) / (1.0 - rho * rho))
    p = float(2.0 * stats.t.sf(abs(t), m - 2))
    return rho, min(1.0, max(0.0, p))


def correlation_report(table: PairTable) -> CorrelationReport:
    if len(table) == 0:
        raise TooFewSamples("pair table is empty")
    per_bc = []
    for k, name in enumerate(table.bc_names):
        rho, p = spearman(table.distances, table.bc_diffs[:, k])
        per_bc.append((name, rho, p))
    return CorrelationReport(per_bc)


def extremal_pairs(points: Sequence[ProjectedPoint]) -> ExtremalPairs:
    """Closest and farthest pairs; ties go to the lowest ``(i, j)`` index pair."""
    if len(points) < 2:
        raise TooFewSamples("need at least two points")
    xy = _coords(points)
    ia, ib = np.triu_indices(len(points), k=1)
    dist = np.hypot(*(xy[ia] - xy[ib]).T)
    # triu_indices enumerates (i, j) lexicographically, argmin/argmax take the first hit
    lo, hi = int(np.argmin(dist)), int(np.argmax(dist))
    ids = [p.level_id for p in points]
    return ExtremalPairs((ids[ia[lo]], ids[ib[lo]], float(dist[lo])),
                         (ids[ia[hi]], ids[ib[hi]], float(dist[hi])))
