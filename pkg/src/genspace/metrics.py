"""Behavioural characteristics (BCs) computed directly from level grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import LevelGrid
from .errors import DomainMismatch

MARIO_BCS = ("ES", "EC", "Lin", "Dens")
BOXOBAN_BCS = ("ES", "CS", "ACS", "CC")
BC_NAMES = {"mario": MARIO_BCS, "boxoban": BOXOBAN_BCS}

STRUCTURAL = ("solid", "pipe", "reward")


@dataclass(frozen=True)
class BCVector:
    domain: str
    values: tuple[tuple[str, float], ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.values)

    def as_array(self) -> np.ndarray:
        return np.array([v for _, v in self.values], dtype=np.float64)

    def __getitem__(self, name: str) -> float:
        return dict(self.values)[name]

    def __len__(self):
        return len(self.values)


def _in_groups(grid: LevelGrid, *groups: str) -> np.ndarray:
    return grid.alphabet.group_mask(*groups)[grid.cells]


def empty_space(grid: LevelGrid) -> int:
    return int(_in_groups(grid, "empty").sum())


def enemy_count(grid: LevelGrid) -> int:
    if "enemy" not in grid.alphabet.groups.values():
        raise DomainMismatch("enemy_count needs an alphabet with an enemy group")
    return int(_in_groups(grid, "enemy").sum())


def column_heights(grid: LevelGrid) -> tuple[np.ndarray, np.ndarray]:
    """Columns holding a structural tile, and the height of the topmost one.

    Height is measured upward from the bottom row (bottom row = 1).
    """
    mask = _in_groups(grid, *STRUCTURAL)
    has_any = mask.any(axis=0)
    top_row = np.argmax(mask, axis=0)
    cols = np.flatnonzero(has_any)
    return cols, (grid.shape[0] - top_row[cols]).astype(np.float64)


def linearity(grid: LevelGrid) -> float:
    """R^2 of a least-squares line through the per-column surface heights.

    Degenerate profiles (under two columns, or perfectly flat) score 1.
    """
    x, y = column_heights(grid)
    if len(x) < 2:
        return 1.0
    y_dev = y - y.mean()
    ss_tot = float(y_dev @ y_dev)
    if ss_tot == 0.0:
        return 1.0
    x_dev = x - x.mean()
    slope = float(x_dev @ y_dev) / float(x_dev @ x_dev)
    resid = y_dev - slope * x_dev
    r2 = 1.0 - float(resid @ resid) / ss_tot
    return min(1.0, max(0.0, r2))


def density(grid: LevelGrid) -> float:
    return float(_in_groups(grid, *STRUCTURAL).sum()) / grid.cells.size


def _solid(grid: LevelGrid) -> np.ndarray:
    if "solid" not in grid.alphabet.groups.values():
        raise DomainMismatch("alphabet has no solid group")
    return _in_groups(grid, "solid")


def _shift_neighbours(mask: np.ndarray):
    """(north, south, west, east) neighbour values; out of bounds reads False."""
    padded = np.pad(mask, 1, constant_values=False)
    return (padded[:-2, 1:-1], padded[2:, 1:-1], padded[1:-1, :-2], padded[1:-1, 2:])


def contiguity(grid: LevelGrid) -> int:
    """Solid cells with at least one solid 4-neighbour."""
    solid = _solid(grid)
    n, s, w, e = _shift_neighbours(solid)
    return int((solid & (n | s | w | e)).sum())


def adjusted_contiguity(grid: LevelGrid) -> float:
    total = int(_solid(grid).sum())
    return contiguity(grid) / total if total else 0.0


def corridor_count(grid: LevelGrid) -> int:
    """Open cells where movement is possible along exactly one axis."""
    open_ = ~_solid(grid)
    n, s, w, e = _shift_neighbours(open_)
    vertical = n | s
    horizontal = w | e
    return int((open_ & (vertical != horizontal)).sum())


def compute_bcs(grid: LevelGrid, domain: str) -> BCVector:
    groups = set(grid.alphabet.groups.values())
    if domain == "mario":
        if "enemy" not in groups:
            raise DomainMismatch("mario BCs need an alphabet with an enemy group")
        vals = (empty_space(grid), enemy_count(grid), linearity(grid), density(grid))
    elif domain == "boxoban":
        if "solid" not in groups or "enemy" in groups:
            raise DomainMismatch("boxoban BCs need a Sokoban alphabet")
        vals = (empty_space(grid), contiguity(grid), adjusted_contiguity(grid),
                corridor_count(grid))
    else:
        raise DomainMismatch(f"unknown domain {domain!r}")
    return BCVector(domain, tuple((n, float(v)) for n, v in zip(BC_NAMES[domain], vals)))
