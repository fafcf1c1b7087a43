"""Level corpora: parsing, tile condensation, one-hot encoding, sampling.

Boxoban files hold many levels, each introduced by a ``; <id>`` header line
and followed by a 10x10 character grid.  Mario AI Benchmark files hold one
16x100 level each over a 28-symbol alphabet which is condensed to five tile
groups before encoding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (InsufficientLevels, MalformedRecord, UnknownTile,
                     UnmappedTile)

GROUPS = frozenset(
    {"empty", "enemy", "solid", "pipe", "reward", "box", "goal", "player"})

BOXOBAN_SIZE = (10, 10)
MARIO_SIZE = (16, 100)


@dataclass(frozen=True)
class TileAlphabet:
    """Ordered tile set; a tile's position is its one-hot channel index."""

    tiles: tuple[tuple[str, str], ...]
    groups: Mapping[str, str]
    aliases: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        chars = [c for c, _ in self.tiles]
        names = [n for _, n in self.tiles]
        if len(set(chars)) != len(chars):
            raise ValueError("duplicate tile characters in alphabet")
        if len(set(names)) != len(names):
            raise ValueError("duplicate tile names in alphabet")
        for name in names:
            group = self.groups.get(name)
            if group not in GROUPS:
                raise ValueError(f"tile {name!r} has invalid group {group!r}")
        for alias, target in self.aliases.items():
            if alias in chars or target not in chars:
                raise ValueError(f"bad alias {alias!r} -> {target!r}")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(chars)})
        object.__setattr__(
            self, "_group_array", np.array([self.groups[n] for n in names]))

    def __len__(self):
        return len(self.tiles)

    @property
    def chars(self) -> list[str]:
        return [c for c, _ in self.tiles]

    def index(self, char: str) -> int:
        """Channel index for ``char``; raises KeyError if absent."""
        char = self.aliases.get(char, char)
        return self._index[char]

    def group_of(self, index: int) -> str:
        return self.groups[self.tiles[index][1]]

    def group_names(self) -> set[str]:
        return set(self._group_array.tolist())

    def group_mask(self, *groups: str) -> np.ndarray:
        """Boolean vector over channels: True where the tile is in ``groups``."""
        return np.isin(self._group_array, groups)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "TileAlphabet":
        return cls(tiles=tuple((c, n) for c, n in doc["tiles"]),
                   groups=dict(doc["groups"]),
                   aliases=dict(doc.get("aliases", {})))


@dataclass(frozen=True)
class LevelGrid:
    cells: np.ndarray
    alphabet: TileAlphabet
    generator: str = ""
    id: str = ""

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise MalformedRecord(f"level {self.id!r}: cells must be a non-empty 2D grid")
        if cells.size and (cells.min() < 0 or cells.max() >= len(self.alphabet)):
            raise MalformedRecord(f"level {self.id!r}: tile index outside alphabet")
        cells = cells.astype(np.int64, copy=True)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def to_text(self) -> str:
        chars = self.alphabet.chars
        return "\n".join("".join(chars[i] for i in row) for row in self.cells)

    def __eq__(self, other):
        if not isinstance(other, LevelGrid):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.generator == other.generator
                and self.id == other.id and np.array_equal(self.cells, other.cells))

    __hash__ = None


@dataclass
class CorpusSample:
    levels: list[LevelGrid]
    seed: int
    per_generator_counts: dict[str, int]


@dataclass(frozen=True)
class MarioTileSet:
    raw: TileAlphabet
    condensed: TileAlphabet
    mapping: Mapping[str, str]


def _load_json(path: str | Path | None, default: str) -> dict:
    if path is None:
        return json.loads(resources.files("genspace.data").joinpath(default).read_text())
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_alphabet(path: str | Path | None = None) -> TileAlphabet:
    """Read an alphabet JSON document (the bundled Boxoban one by default)."""
    return TileAlphabet.from_dict(_load_json(path, "boxoban.json"))


def boxoban_alphabet() -> TileAlphabet:
    return load_alphabet(None)


def load_mario_tiles(path: str | Path | None = None) -> MarioTileSet:
    doc = _load_json(path, "mario.json")
    return MarioTileSet(raw=TileAlphabet.from_dict(doc["raw"]),
                        condensed=TileAlphabet.from_dict(doc["condensed"]),
                        mapping=dict(doc["mapping"]))


def _grid_from_lines(lines, alphabet, start_line, source):
    cells = np.empty((len(lines), len(lines[0])), dtype=np.int64)
    for r, line in enumerate(lines):
        for c, ch in enumerate(line):
            try:
                cells[r, c] = alphabet.index(ch)
            except KeyError:
                raise UnknownTile(ch, start_line + r, c + 1, source) from None
    return cells


def parse_boxoban(text: str, alphabet: TileAlphabet | None = None,
                  generator: str = "", source: str | None = None) -> list[LevelGrid]:
    """Parse a multi-level Boxoban file into 10x10 grids, preserving order.

    Level ids are ``<generator>/<header id>`` (``<source>`` is only used in
    error messages).
    """
    alphabet = alphabet or boxoban_alphabet()
    height, width = BOXOBAN_SIZE
    lines = text.splitlines()
    levels = []
    i = 0
    while i < len(lines):
        line = lines[i]
        if not line.strip():
            i += 1
            continue
        if not line.startswith(";"):
            raise MalformedRecord(f"{source or 'text'}: line {i + 1}: expected ';' header")
        header = line[1:].strip()
        body = []
        j = i + 1
        # rows may be all spaces; only a truly empty line ends a record early
        while j < len(lines) and not lines[j].startswith(";") and lines[j] != "":
            body.append(lines[j])
            j += 1
        if len(body) != height:
            raise MalformedRecord(
                f"{source or 'text'}: record {header!r} at line {i + 1} has "
                f"{len(body)} grid lines, expected {height}")
        for k, row in enumerate(body):
            if len(row) != width:
                raise MalformedRecord(
                    f"{source or 'text'}: line {i + 2 + k} has width {len(row)}, "
                    f"expected {width}")
        cells = _grid_from_lines(body, alphabet, i + 2, source)
        levels.append(LevelGrid(cells, alphabet, generator, f"{generator}/{header}"))
        i = j
    return levels


def parse_mario(text: str, raw_alphabet: TileAlphabet | None = None,
                generator: str = "", level_id: str = "",
                source: str | None = None) -> LevelGrid:
    """Parse one 16x100 Mario level over the raw alphabet."""
    raw_alphabet = raw_alphabet or load_mario_tiles().raw
    lines = [ln for ln in text.splitlines() if ln != ""]
    height, width = MARIO_SIZE
    if len(lines) != height:
        raise MalformedRecord(
            f"{source or 'text'}: {len(lines)} lines, expected {height}")
    for r, line in enumerate(lines):
        if len(line) != width:
            raise MalformedRecord(
                f"{source or 'text'}: line {r + 1} has width {len(line)}, expected {width}")
    cells = _grid_from_lines(lines, raw_alphabet, 1, source)
    return LevelGrid(cells, raw_alphabet, generator, level_id)


def condense_tiles(grid: LevelGrid, mapping: Mapping[str, str],
                   condensed: TileAlphabet) -> LevelGrid:
    """Replace every raw tile by its condensed counterpart (by character)."""
    lookup = np.empty(len(grid.alphabet), dtype=np.int64)
    for i, (char, _) in enumerate(grid.alphabet.tiles):
        if char not in mapping:
            raise UnmappedTile(f"raw tile {char!r} has no condensed mapping")
        try:
            lookup[i] = condensed.index(mapping[char])
        except KeyError:
            raise UnmappedTile(
                f"raw tile {char!r} maps to {mapping[char]!r}, absent from condensed alphabet"
            ) from None
    return LevelGrid(lookup[grid.cells], condensed, grid.generator, grid.id)


def one_hot_encode(grid: LevelGrid, alphabet: TileAlphabet | None = None) -> np.ndarray:
    """(height, width, channels) float array with a single 1 per cell."""
    alphabet = alphabet or grid.alphabet
    return np.eye(len(alphabet), dtype=np.float64)[grid.cells]


def decode(tensor: np.ndarray, alphabet: TileAlphabet, generator: str = "",
           level_id: str = "") -> LevelGrid:
    return LevelGrid(np.argmax(tensor, axis=-1), alphabet, generator, level_id)


def load_boxoban_pool(paths: str | Path | Sequence[str | Path], generator: str,
                      alphabet: TileAlphabet | None = None) -> list[LevelGrid]:
    """Every level in the given files/directories (``*.txt``, sorted by name).

    Ids are prefixed with the file stem so that files sharing header numbers
    do not collide.
    """
    alphabet = alphabet or boxoban_alphabet()
    levels = []
    for path in _expand(paths):
        for lvl in parse_boxoban(path.read_text(encoding="utf-8"), alphabet,
                                 generator, source=str(path)):
            header = lvl.id.split("/", 1)[1]
            levels.append(LevelGrid(lvl.cells, alphabet, generator,
                                    f"{generator}/{path.stem}:{header}"))
    return levels


def load_mario_pool(paths: str | Path | Sequence[str | Path], generator: str,
                    tiles: MarioTileSet | None = None) -> list[LevelGrid]:
    """Condensed Mario levels from files/directories, one level per file."""
    tiles = tiles or load_mario_tiles()
    levels = []
    for path in _expand(paths):
        raw = parse_mario(path.read_text(encoding="utf-8"), tiles.raw, generator,
                          f"{generator}/{path.stem}", source=str(path))
        levels.append(condense_tiles(raw, tiles.mapping, tiles.condensed))
    return levels


def _expand(paths) -> list[Path]:
    if isinstance(paths, (str, Path)):
        paths = [paths]
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix == ".txt"))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(f"corpus path not found: {p}")
    return out


def generator_quotas(generators: Sequence[str], n: int) -> dict[str, int]:
    """Split ``n`` as evenly as possible; the remainder goes to the first labels."""
    labels = sorted(generators)
    base, extra = divmod(n, len(labels))
    return {g: base + (1 if i < extra else 0) for i, g in enumerate(labels)}


def sample_even(corpus: Mapping[str, Sequence[LevelGrid]], n: int, seed: int) -> CorpusSample:
    if not corpus:
        raise InsufficientLevels("<none>", 0, n)
    quotas = generator_quotas(list(corpus), n)
    rng = np.random.default_rng(seed)
    required = math.ceil(n / len(corpus))
    levels = []
    for gen in sorted(corpus):
        pool = corpus[gen]
        if len(pool) < max(required, quotas[gen]):
            raise InsufficientLevels(gen, len(pool), required)
        picks = rng.choice(len(pool), size=quotas[gen], replace=False)
        levels.extend(pool[i] for i in picks)
    return CorpusSample(levels, seed, quotas)


def split_train_test(sample: CorpusSample | Sequence[LevelGrid], train_fraction: float,
                     seed: int) -> tuple[list[LevelGrid], list[LevelGrid]]:
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    levels = list(sample.levels if isinstance(sample, CorpusSample) else sample)
    n_train = math.floor(len(levels) * train_fraction + 0.5)
    order = np.random.default_rng(seed).permutation(len(levels))
    train = [levels[i] for i in order[:n_train]]
    test = [levels[i] for i in order[n_train:]]
    return train, test
