"""Repeated-split experiments: partition, run, score, aggregate.

The feature matrix, graph, and spectral basis are computed once per data set
and shared (immutably) across splits; split i uses seed base_seed + i unless
an explicit seeds file is supplied. Reports aggregate the per-split optimal
scores and thresholds and serialize to JSON-lines with one record per split
plus a summary record.
"""

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import (
    FeatureMatrix,
    load_features,
    load_labels,
    load_seeds,
    make_partition,
    standardize,
)
from .evaluation import RankTable, friedman_nemenyi
from .graph import KernelSpec, build_knn_graph, build_laplacian, graph_checksum
from .mbo import MboConfig, run_dt_mbo
from .spectral import DEFAULT_N_EIGS, eigendecompose, load_basis, nystrom_decompose, save_basis

SCHEMA_VERSION = 1

# Flat key = value config format; '#' starts a comment. Every field of
# ExperimentConfig is addressable by exactly one key.
CONFIG_KEYS = (
    "features_path",
    "labels_path",
    "kernel",
    "sigma",
    "n_neighbors",
    "n_eigs",
    "normalization",
    "dt",
    "fidelity_strength",
    "n_diffusion_substeps",
    "max_iterations",
    "tau_low",
    "tau_high",
    "tau_step",
    "n_splits",
    "labeled_fraction",
    "base_seed",
    "eigensolver",
    "n_landmarks",
    "seeds_path",
)


class SplitFailure(RuntimeError):
    """A split aborted; carries the seed that failed."""

    def __init__(self, seed, cause):
        super().__init__(f"split with seed {seed} failed: {cause}")
        self.seed = seed


@dataclass(frozen=True)
class ExperimentConfig:
    features_path: str
    labels_path: str
    kernel: KernelSpec
    mbo: MboConfig
    n_neighbors: int = 10
    n_eigs: int = DEFAULT_N_EIGS
    normalization: str = "symmetric"
    n_splits: int = 50
    labeled_fraction: float = 0.8
    base_seed: int = 0
    eigensolver: str = "exact"
    n_landmarks: int | None = None
    seeds_path: str | None = None

    def __post_init__(self):
        if self.n_splits < 1:
            raise ValueError("n_splits must be at least 1")
        if not 0.0 < self.labeled_fraction < 1.0:
            raise ValueError("labeled_fraction must lie in (0, 1)")
        if self.base_seed < 0:
            raise ValueError("base_seed must be nonnegative")
        if self.eigensolver not in ("exact", "nystrom"):
            raise ValueError(f"eigensolver must be 'exact' or 'nystrom', got {self.eigensolver!r}")
        if self.eigensolver == "nystrom" and self.n_landmarks is None:
            raise ValueError("nystrom eigensolver requires n_landmarks")

    def to_mapping(self) -> dict:
        """Flat, JSON-ready echo of every config field (config-file keys)."""
        return {
            "features_path": self.features_path,
            "labels_path": self.labels_path,
            "kernel": self.kernel.kind,
            "sigma": self.kernel.sigma,
            "n_neighbors": self.n_neighbors,
            "n_eigs": self.n_eigs,
            "normalization": self.normalization,
            "dt": self.mbo.dt,
            "fidelity_strength": self.mbo.fidelity_strength,
            "n_diffusion_substeps": self.mbo.n_diffusion_substeps,
            "max_iterations": self.mbo.max_iterations,
            "tau_low": self.mbo.tau_low,
            "tau_high": self.mbo.tau_high,
            "tau_step": self.mbo.tau_step,
            "n_splits": self.n_splits,
            "labeled_fraction": self.labeled_fraction,
            "base_seed": self.base_seed,
            "eigensolver": self.eigensolver,
            "n_landmarks": self.n_landmarks,
            "seeds_path": self.seeds_path,
        }


@dataclass(frozen=True)
class SplitRecord:
    """Result of one labeled/unlabeled split."""

    seed: int
    best_threshold: float
    best_score: float
    soft_auc: float
    thresholds: tuple
    scores: tuple
    predicted_labels: tuple
    degenerate: bool = False

    def to_record(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "record": "split",
            "seed": self.seed,
            "best_threshold": self.best_threshold,
            "best_score": self.best_score,
            "soft_auc": self.soft_auc,
            "thresholds": list(self.thresholds),
            "scores": list(self.scores),
            "predicted_labels": list(self.predicted_labels),
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class ExperimentReport:
    per_split: tuple
    mean_score: float
    std_score: float
    median_best_threshold: float
    min_best_threshold: float
    max_best_threshold: float
    mean_soft_auc: float
    wall_time: float

    @property
    def n_splits(self) -> int:
        return len(self.per_split)


def parse_config_text(text: str) -> dict:
    """Parse flat key = value lines into a string mapping; unknown keys and
    lines without '=' are rejected with their line number."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if value:
            mapping[key] = value
    return mapping


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build a validated ExperimentConfig from string (or typed) values."""
    unknown = set(mapping) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for required in ("features_path", "labels_path"):
        if not mapping.get(required):
            raise ValueError(f"config missing required key {required!r}")

    def get(key, convert, default=None):
        if key not in mapping or mapping[key] is None:
            return default
        return convert(mapping[key])

    kind = get("kernel", str, "gaussian")
    sigma = get("sigma", float)
    if kind == "gaussian" and sigma is None:
        raise ValueError("gaussian kernel requires the 'sigma' config key")
    kernel = KernelSpec(kind=kind, sigma=sigma if kind == "gaussian" else None)
    mbo = MboConfig(
        dt=get("dt", float, 0.1),
        fidelity_strength=get("fidelity_strength", float, 30.0),
        max_iterations=get("max_iterations", int, 60),
        n_diffusion_substeps=get("n_diffusion_substeps", int, 3),
        tau_low=get("tau_low", float, 0.05),
        tau_high=get("tau_high", float, 0.55),
        tau_step=get("tau_step", float, 0.05),
    )
    return ExperimentConfig(
        features_path=str(mapping["features_path"]),
        labels_path=str(mapping["labels_path"]),
        kernel=kernel,
        mbo=mbo,
        n_neighbors=get("n_neighbors", int, 10),
        n_eigs=get("n_eigs", int, DEFAULT_N_EIGS),
        normalization=get("normalization", str, "symmetric"),
        n_splits=get("n_splits", int, 50),
        labeled_fraction=get("labeled_fraction", float, 0.8),
        base_seed=get("base_seed", int, 0),
        eigensolver=get("eigensolver", str, "exact"),
        n_landmarks=get("n_landmarks", int),
        seeds_path=get("seeds_path", str),
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Config file plus optional override mapping (CLI flags win)."""
    with open(path, encoding="utf-8") as fh:
        mapping = parse_config_text(fh.read())
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                mapping[key] = value
    return config_from_mapping(mapping)


def _infer_format(path) -> str:
    return "tsv" if str(path).endswith(".tsv") else "csv"


def prepare_inputs(cfg: ExperimentConfig):
    """Load, validate, and standardize the feature/label files."""
    fm = load_features(cfg.features_path, _infer_format(cfg.features_path))
    labels, class_names = load_labels(cfg.labels_path)
    if labels.size != fm.n_samples:
        raise ValueError(
            f"feature file has {fm.n_samples} rows but label file has {labels.size}"
        )
    return standardize(fm), labels, class_names


def compute_basis(cfg: ExperimentConfig, fm: FeatureMatrix, cache_path=None):
    """Spectral basis for the configured eigensolver, optionally cached.

    The cache is keyed by a checksum (graph contents for the exact path,
    feature bytes plus landmark settings for the approximate path); a stale
    cache is recomputed and overwritten.
    """
    if cfg.eigensolver == "exact":
        graph = build_knn_graph(fm, cfg.n_neighbors, cfg.kernel)
        lap = build_laplacian(graph, cfg.normalization)
        checksum = f"{graph_checksum(graph)}:{cfg.normalization}:{cfg.n_eigs}"

        def compute():
            return eigendecompose(lap, cfg.n_eigs)

    else:
        digest = hashlib.sha256(fm.values.tobytes())
        digest.update(
            f"{cfg.kernel.kind}:{cfg.kernel.sigma}:{cfg.n_landmarks}:{cfg.n_eigs}:{cfg.base_seed}".encode()
        )
        checksum = digest.hexdigest()

        def compute():
            return nystrom_decompose(fm, cfg.kernel, cfg.n_eigs, cfg.n_landmarks, seed=cfg.base_seed)
    if cache_path is not None and Path(cache_path).exists():
        try:
            return load_basis(cache_path, expected_checksum=checksum)
        except ValueError:
            pass
    basis = compute()
    if cache_path is not None:
        save_basis(basis, cache_path, checksum=checksum)
    return basis


def split_seeds(cfg: ExperimentConfig) -> list:
    if cfg.seeds_path:
        seeds = load_seeds(cfg.seeds_path)
        if len(seeds) < cfg.n_splits:
            raise ValueError(
                f"seeds file has {len(seeds)} entries but n_splits is {cfg.n_splits}"
            )
        return seeds[: cfg.n_splits]
    return [cfg.base_seed + i for i in range(cfg.n_splits)]


def run_experiment(cfg: ExperimentConfig, n_threads: int = 1, basis_cache=None) -> ExperimentReport:
    """Run every split and aggregate. Deterministic given the config; splits
    may execute on a thread pool but results are gathered in seed order."""
    start = time.perf_counter()
    fm, labels, _ = prepare_inputs(cfg)
    basis = compute_basis(cfg, fm, cache_path=basis_cache)
    seeds = split_seeds(cfg)

    def one_split(seed):
        try:
            partition = make_partition(labels, cfg.labeled_fraction, seed)
            sweep = run_dt_mbo(basis, partition, cfg.mbo, seed)
        except Exception as exc:
            raise SplitFailure(seed, exc) from exc
        return SplitRecord(
            seed=seed,
            best_threshold=sweep.best_threshold,
            best_score=sweep.best_score,
            soft_auc=sweep.soft_auc,
            thresholds=tuple(sweep.thresholds.tolist()),
            scores=tuple(sweep.scores.tolist()),
            predicted_labels=tuple(sweep.best_labels().tolist()),
            degenerate=sweep.degenerate,
        )

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            records = list(pool.map(one_split, seeds))
    else:
        records = [one_split(seed) for seed in seeds]

    best_scores = np.array([r.best_score for r in records])
    best_thresholds = np.array([r.best_threshold for r in records])
    return ExperimentReport(
        per_split=tuple(records),
        mean_score=float(best_scores.mean()),
        std_score=float(best_scores.std()),
        median_best_threshold=float(np.median(best_thresholds)),
        min_best_threshold=float(best_thresholds.min()),
        max_best_threshold=float(best_thresholds.max()),
        mean_soft_auc=float(np.mean([r.soft_auc for r in records])),
        wall_time=time.perf_counter() - start,
    )


def report_records(report: ExperimentReport, cfg: ExperimentConfig,
                   method: str | None = None, dataset: str | None = None) -> list:
    """JSON-ready records: one per split plus a trailing summary carrying the
    aggregates, the config echo, and method/dataset names for comparisons."""
    records = [split.to_record() for split in report.per_split]
    summary = {
        "schema_version": SCHEMA_VERSION,
        "record": "summary",
        "method": method or f"dt-mbo-{cfg.kernel.kind}",
        "dataset": dataset or Path(cfg.features_path).stem,
        "n_splits": report.n_splits,
        "mean_score": report.mean_score,
        "std_score": report.std_score,
        "median_best_threshold": report.median_best_threshold,
        "min_best_threshold": report.min_best_threshold,
        "max_best_threshold": report.max_best_threshold,
        "mean_soft_auc": report.mean_soft_auc,
        "wall_time": report.wall_time,
        "config": cfg.to_mapping(),
    }
    records.append(summary)
    return records


def write_report(report: ExperimentReport, cfg: ExperimentConfig, path,
                 method: str | None = None, dataset: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in report_records(report, cfg, method=method, dataset=dataset):
            fh.write(json.dumps(record) + "\n")


def read_method_scores(paths) -> dict:
    """Collect {method: {dataset: score}} from JSON-lines files.

    Accepts experiment summary records (method/dataset/mean_score) and plain
    {"method", "dataset", "score"} records; split records are skipped.
    """
    scores = {}
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}: line {lineno}: not valid JSON ({exc})") from exc
                if record.get("record") == "summary":
                    value = record["mean_score"]
                elif {"method", "dataset", "score"} <= record.keys():
                    value = record["score"]
                else:
                    continue
                scores.setdefault(record["method"], {})[record["dataset"]] = float(value)
    return scores


def compare_methods(method_scores: dict, alpha: float = 0.05) -> RankTable:
    """Friedman/Nemenyi ranking of {method: {dataset: score}}; every method
    must cover every data set."""
    if not method_scores:
        raise ValueError("no method scores provided")
    methods = list(method_scores)
    datasets = sorted({d for per_method in method_scores.values() for d in per_method})
    table = np.empty((len(datasets), len(methods)))
    for j, method in enumerate(methods):
        for i, dataset in enumerate(datasets):
            if dataset not in method_scores[method]:
                raise ValueError(f"method {method!r} has no score for data set {dataset!r}")
            table[i, j] = method_scores[method][dataset]
    return friedman_nemenyi(table, alpha=alpha, methods=methods, datasets=datasets)


def generate_synthetic(n_majority: int, n_minority: int, dims: int,
                       separation: float, seed: int):
    """Two unit-covariance Gaussian clouds whose means differ by `separation`
    along the first coordinate; majority is class 0. Returns (features,
    labels), deterministic per seed."""
    if n_majority < 1 or n_minority < 1:
        raise ValueError("both class sizes must be at least 1")
    if dims < 1:
        raise ValueError("dims must be at least 1")
    rng = np.random.default_rng(seed)
    majority = rng.normal(size=(n_majority, dims))
    minority = rng.normal(size=(n_minority, dims))
    minority[:, 0] += separation
    features = FeatureMatrix(np.vstack([majority, minority]))
    labels = np.concatenate([np.zeros(n_majority, dtype=int), np.ones(n_minority, dtype=int)])
    return features, labels
