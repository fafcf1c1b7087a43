"""End-to-end experiments: sample, split, train, project, validate, aggregate."""

from __future__ import annotations

import json
import logging
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import corpus as corpus_mod
from .compression import ProjectedPoint, cnn_dr, vanilla_dr
from .corpus import LevelGrid, one_hot_encode, sample_even, split_train_test
from .errors import ConfigError, DegenerateData, NoCompletedRuns, NonFiniteLoss
from .metrics import BC_NAMES, BCVector, compute_bcs
from .nn.network import DEFAULT_LEARNING_RATES, NetworkConfig, save_network
from .nn.training import TrainingHistory, train
from .validation import (CorrelationReport, ExtremalPairs, build_pair_table,
                         correlation_report, extremal_pairs)

log = logging.getLogger(__name__)

METHODS = ("vgg16", "basic", "vanilla_dr")
CNN_METHODS = ("vgg16", "basic")
WORKERS_ENV = "GENSPACE_WORKERS"
STAR_THRESHOLD = 0.01


@dataclass
class MethodSettings:
    learning_rate: float
    epochs: int = 100
    batch_size: int = 32
    early_stopping: Optional[tuple[int, float]] = None
    dtype: str = "float64"


@dataclass
class ExperimentConfig:
    domain: str
    corpus: dict[str, list[str]]
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    sample_size: int = 1000
    train_fraction: float = 0.8
    runs: int = 5
    base_seed: int = 0
    network: dict[str, MethodSettings] = field(default_factory=dict)
    training_mode: str = "joint"
    include_failed_as_zero: bool = False
    output_dir: str = "results"
    alphabet: Optional[str] = None
    figures: bool = True
    save_models: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.domain not in BC_NAMES:
            raise ConfigError(f"domain must be one of {sorted(BC_NAMES)}, got {self.domain!r}")
        if not self.corpus:
            raise ConfigError("corpus must name at least one generator")
        self.corpus = {g: [p] if isinstance(p, str) else list(p) for g, p in self.corpus.items()}
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.training_mode not in ("joint", "per_bc"):
            raise ConfigError("training_mode must be 'joint' or 'per_bc'")
        settings = {}
        for arch in CNN_METHODS:
            given = self.network.get(arch, {})
            if isinstance(given, MethodSettings):
                settings[arch] = given
                continue
            given = dict(given)
            given.setdefault("learning_rate", DEFAULT_LEARNING_RATES[arch])
            if given.get("early_stopping") is not None:
                given["early_stopping"] = tuple(given["early_stopping"])
            try:
                settings[arch] = MethodSettings(**given)
            except TypeError as exc:
                raise ConfigError(f"network.{arch}: {exc}") from None
        self.network = settings

    @classmethod
    def from_dict(cls, doc: Mapping, base_dir: str | Path | None = None) -> "ExperimentConfig":
        doc = dict(doc)
        base = Path(base_dir) if base_dir is not None else None
        if base is not None:
            def resolve(p):
                return str(p) if Path(p).is_absolute() else str(base / p)
            corp = doc.get("corpus", {})
            doc["corpus"] = {g: [resolve(x) for x in ([p] if isinstance(p, str) else p)]
                             for g, p in corp.items()}
            for key in ("output_dir", "alphabet"):
                if doc.get(key):
                    doc[key] = resolve(doc[key])
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return ExperimentConfig.from_dict(doc, path.parent)


def load_corpus(config: ExperimentConfig) -> dict[str, list[LevelGrid]]:
    pools = {}
    for gen, paths in config.corpus.items():
        if config.domain == "boxoban":
            alphabet = corpus_mod.load_alphabet(config.alphabet)
            pools[gen] = corpus_mod.load_boxoban_pool(paths, gen, alphabet)
        else:
            tiles = corpus_mod.load_mario_tiles(config.alphabet)
            pools[gen] = corpus_mod.load_mario_pool(paths, gen, tiles)
    return pools


@dataclass
class RunData:
    seed: int
    train: list[LevelGrid]
    test: list[LevelGrid]
    train_x: np.ndarray
    train_bcs: list[BCVector]
    test_x: np.ndarray
    test_bcs: list[BCVector]

    @property
    def test_ids(self) -> list[str]:
        return [g.id for g in self.test]

    @property
    def test_generators(self) -> list[str]:
        return [g.generator for g in self.test]


@dataclass
class RunReport:
    run_index: int
    method: str
    seed: int
    points: list[ProjectedPoint] = field(default_factory=list)
    correlation: Optional[CorrelationReport] = None
    extremal: Optional[ExtremalPairs] = None
    training: Optional[TrainingHistory] = None
    failed: Optional[str] = None
    failure_kind: Optional[str] = None
    test_ids: list[str] = field(default_factory=list)
    generator_counts: dict[str, int] = field(default_factory=dict)
    explained_variance: Optional[list[float]] = None
    training_mode: str = "joint"
    bc_names: tuple[str, ...] = ()


def prepare_run(config: ExperimentConfig, pools: Mapping[str, Sequence[LevelGrid]],
                run_index: int) -> RunData:
    seed = config.base_seed + run_index
    sample = sample_even(pools, config.sample_size, seed)
    train_levels, test_levels = split_train_test(sample, config.train_fraction, seed)

    def encode(levels):
        return np.stack([one_hot_encode(g) for g in levels])

    return RunData(seed, train_levels, test_levels,
                   encode(train_levels), [compute_bcs(g, config.domain) for g in train_levels],
                   encode(test_levels), [compute_bcs(g, config.domain) for g in test_levels])


def _network_config(config, method, data, output_count) -> NetworkConfig:
    s = config.network[method]
    return NetworkConfig(architecture=method, input_shape=data.train_x.shape[1:],
                         output_count=output_count, learning_rate=s.learning_rate,
                         epochs=s.epochs, batch_size=min(s.batch_size, len(data.train)),
                         seed=data.seed, early_stopping=s.early_stopping, dtype=s.dtype)


def _validate(points, bcs):
    table = build_pair_table(points, bcs)
    return correlation_report(table), extremal_pairs(points)


def run_method(config: ExperimentConfig, method: str, data: RunData, run_index: int,
               model_dir: Path | None = None) -> RunReport:
    names = BC_NAMES[config.domain]
    report = RunReport(run_index, method, data.seed, test_ids=data.test_ids,
                       generator_counts=dict(sorted(Counter(data.test_generators).items())),
                       bc_names=names,
                       training_mode=config.training_mode if method in CNN_METHODS else "none")
    ids, gens = data.test_ids, data.test_generators
    try:
        if method == "vanilla_dr":
            points, model = vanilla_dr(list(data.test_x), ids, gens)
            report.points = points
            report.correlation, report.extremal = _validate(points, data.test_bcs)
        elif config.training_mode == "joint":
            cfg = _network_config(config, method, data, len(names))
            net, report.training = train(cfg, list(zip(data.train_x, data.train_bcs)))
            if model_dir is not None:
                save_network(net, model_dir / f"model_{method}_{run_index}.npz")
            points, model = cnn_dr(net, list(data.test_x), ids, gens)
            report.points = points
            report.correlation, report.extremal = _validate(points, data.test_bcs)
        else:
            # one single-output network per BC; each BC is scored on its own projection
            per_bc, model = [], None
            cfg = _network_config(config, method, data, 1)
            report.training = TrainingHistory()
            for k, name in enumerate(names):
                targets = [b.as_array()[k:k + 1] for b in data.train_bcs]
                net, hist = train(cfg, list(zip(data.train_x, targets)))
                report.training.losses.extend(hist.losses)
                report.training.seconds.extend(hist.seconds)
                points, m = cnn_dr(net, list(data.test_x), ids, gens)
                corr, extremal = _validate(points, data.test_bcs)
                per_bc.append((name, corr.rho(name), corr.p(name)))
                if k == 0:
                    report.points, report.extremal, model = points, extremal, m
            report.correlation = CorrelationReport(per_bc)
        report.explained_variance = [float(v) for v in model.explained_variance_ratio]
    except NonFiniteLoss as exc:
        report.failed, report.failure_kind = str(exc), "nonfinite"
    except DegenerateData as exc:
        report.failed, report.failure_kind = f"degenerate embeddings: {exc}", "degenerate"
    if report.failed:
        report.correlation = None
        log.warning("run %d %s failed: %s", run_index, method, report.failed)
    return report


def run_once(config: ExperimentConfig, method: str, run_index: int,
             pools: Mapping[str, Sequence[LevelGrid]] | None = None) -> RunReport:
    pools = pools if pools is not None else load_corpus(config)
    return run_method(config, method, prepare_run(config, pools, run_index), run_index)


def _run_all_methods(args) -> list[RunReport]:
    config, pools, run_index, model_dir = args
    data = prepare_run(config, pools, run_index)
    return [run_method(config, m, data, run_index, model_dir) for m in config.methods]


def worker_count(config: ExperimentConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    cap = int(env) if env else config.workers
    return max(1, min(cap, config.runs))


def run_experiment(config: ExperimentConfig,
                   pools: Mapping[str, Sequence[LevelGrid]] | None = None) -> list[RunReport]:
    """Every method for every run; reports ordered by (run, method)."""
    pools = pools if pools is not None else load_corpus(config)
    model_dir = None
    if config.save_models:
        model_dir = Path(config.output_dir) / "models"
        model_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(config, pools, r, model_dir) for r in range(config.runs)]
    workers = worker_count(config)
    if workers == 1:
        batches = [_run_all_methods(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_all_methods, tasks))
    return [r for batch in batches for r in batch]


@dataclass(frozen=True)
class SummaryRow:
    method: str
    bc: str
    mean_rho: float
    std_rho: float
    mean_p: float
    std_p: float
    star: bool
    completed: int
    failed: int


@dataclass
class SummaryTable:
    rows: list[SummaryRow]

    def get(self, method: str, bc: str) -> SummaryRow:
        return next(r for r in self.rows if r.method == method and r.bc == bc)

    @property
    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.rows))


def star_flag(mean_p: float, std_p: float) -> bool:
    return mean_p + std_p > STAR_THRESHOLD


def _sample_std(values) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def aggregate_runs(reports: Sequence[RunReport], include_failed_as_zero: bool = False,
                   skip_empty: bool = False) -> SummaryTable:
    """Mean/std of rho and p per (method, BC) over completed runs.

    Failed runs are excluded (and counted).  With ``include_failed_as_zero``
    runs that trained but produced degenerate embeddings count as rho=0, p=1;
    non-finite-loss runs are never included.
    """
    rows = []
    methods = list(dict.fromkeys(r.method for r in reports))
    for method in methods:
        mine = [r for r in reports if r.method == method]
        done = [r for r in mine if not r.failed]
        zeros = [r for r in mine if include_failed_as_zero and r.failure_kind == "degenerate"]
        n_failed = len(mine) - len(done)
        if not done and not zeros:
            if skip_empty:
                log.warning("method %s has no completed runs; left out of summary", method)
                continue
            raise NoCompletedRuns(f"method {method!r} has no completed runs")
        names = (done[0].correlation.per_bc if done else
                 [(n, 0.0, 1.0) for n in zeros[0].bc_names])
        for k, (bc, _, _) in enumerate(names):
            rhos = [r.correlation.per_bc[k][1] for r in done] + [0.0] * len(zeros)
            ps = [r.correlation.per_bc[k][2] for r in done] + [1.0] * len(zeros)
            mean_p, std_p = float(np.mean(ps)), _sample_std(ps)
            rows.append(SummaryRow(method, bc, float(np.mean(rhos)), _sample_std(rhos),
                                   mean_p, std_p, star_flag(mean_p, std_p),
                                   len(rhos), n_failed - len(zeros)))
    return SummaryTable(rows)
