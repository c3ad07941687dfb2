"""Loading, standardization, and labeled/unlabeled partitioning of data sets.

Features arrive as rectangular CSV/TSV tables (one row per sample, UTF-8);
labels as a single-column file of class names or integers. Every container
returned here is immutable after construction and safe to share across
threads; all operations are pure functions.
"""

import math
from dataclasses import dataclass

import numpy as np

MAX_PARTITION_ATTEMPTS = 100


class ParseError(ValueError):
    """Malformed input file; the message carries the offending location."""


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FeatureMatrix:
    """N x D real-valued feature table, one row per data element."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {v.shape}")
        if v.size == 0:
            raise ValueError("feature matrix must be non-empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature matrix contains NaN or Inf entries")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelPartition:
    """True class per element plus the labeled/unlabeled mask of one split."""

    true_labels: np.ndarray
    labeled_mask: np.ndarray
    seed: int
    n_classes: int

    def __post_init__(self):
        labels = np.asarray(self.true_labels, dtype=int)
        mask = np.asarray(self.labeled_mask, dtype=bool)
        if labels.ndim != 1 or labels.shape != mask.shape:
            raise ValueError("true_labels and labeled_mask must be equal-length 1-D arrays")
        if labels.size == 0:
            raise ValueError("partition must cover at least one element")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise ValueError("class indices must lie in [0, n_classes)")
        object.__setattr__(self, "true_labels", _readonly(labels))
        object.__setattr__(self, "labeled_mask", _readonly(mask))

    @property
    def n_samples(self) -> int:
        return self.true_labels.size

    @property
    def n_labeled(self) -> int:
        return int(self.labeled_mask.sum())


@dataclass(frozen=True)
class ClassStats:
    """Per-class counts, minority class index, and imbalance ratio."""

    class_counts: np.ndarray
    minority_index: int
    imbalance_ratio: float

    def __post_init__(self):
        object.__setattr__(self, "class_counts", _readonly(np.asarray(self.class_counts, dtype=int)))


def _parse_cell(cell: str) -> float:
    value = float(cell)
    if not math.isfinite(value):
        raise ValueError(cell)
    return value


def _is_numeric(cell: str) -> bool:
    try:
        _parse_cell(cell)
    except ValueError:
        return False
    return True


def load_features(path, fmt: str = "csv") -> FeatureMatrix:
    """Read a rectangular numeric table; a single non-numeric header row is
    auto-detected and skipped. Raises ParseError with row/column coordinates
    on ragged or non-numeric input."""
    delimiters = {"csv": ",", "tsv": "\t"}
    if fmt not in delimiters:
        raise ValueError(f"unsupported format {fmt!r}; expected 'csv' or 'tsv'")
    sep = delimiters[fmt]
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError(f"{path}: empty file")

    first = lines[0].split(sep)
    has_header = not all(_is_numeric(c) for c in first)
    width = len(first)
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if lineno == 1 and has_header:
            continue
        cells = line.split(sep)
        if len(cells) != width:
            raise ParseError(f"{path}: row {lineno}: expected {width} columns, got {len(cells)}")
        parsed = []
        for col, cell in enumerate(cells, start=1):
            try:
                parsed.append(_parse_cell(cell))
            except ValueError:
                raise ParseError(
                    f"{path}: row {lineno}, column {col}: non-numeric value {cell.strip()!r}"
                ) from None
        rows.append(parsed)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return FeatureMatrix(np.array(rows, dtype=float))


def load_labels(path):
    """Read a single-column label file.

    Integer labels that already form 0..m-1 are used directly; anything else
    (class names, arbitrary integers) is mapped to indices by first
    appearance. Returns (labels, class_names).
    """
    with open(path, encoding="utf-8") as fh:
        values = [line.strip() for line in fh.read().splitlines() if line.strip()]
    if not values:
        raise ParseError(f"{path}: empty label file")
    try:
        ints = [int(v) for v in values]
    except ValueError:
        ints = None
    if ints is not None and sorted(set(ints)) == list(range(max(ints) + 1)):
        labels = np.array(ints, dtype=int)
        names = [str(i) for i in range(max(ints) + 1)]
        return labels, names
    names = []
    index = {}
    labels = np.empty(len(values), dtype=int)
    for i, v in enumerate(values):
        if v not in index:
            index[v] = len(names)
            names.append(v)
        labels[i] = index[v]
    return labels, names


def load_seeds(path):
    """Read a seeds file: one nonnegative integer per line."""
    seeds = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh.read().splitlines(), start=1):
            text = line.strip()
            if not text:
                continue
            try:
                seed = int(text)
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: not an integer: {text!r}") from None
            if seed < 0:
                raise ParseError(f"{path}: line {lineno}: seeds must be nonnegative")
            seeds.append(seed)
    if not seeds:
        raise ParseError(f"{path}: empty seeds file")
    return seeds


def standardize(fm: FeatureMatrix) -> FeatureMatrix:
    """Scale each column to zero mean and unit sample standard deviation
    (ddof=1). Constant columns become all-zeros instead of raising, since
    feature tables may contain dead dimensions."""
    if fm.n_samples < 2:
        raise ValueError("standardize requires at least 2 samples")
    v = fm.values
    mean = v.mean(axis=0)
    std = v.std(axis=0, ddof=1)
    out = np.zeros_like(v)
    live = std > 0
    out[:, live] = (v[:, live] - mean[live]) / std[live]
    return FeatureMatrix(out)


def make_partition(labels, labeled_fraction: float, seed: int,
                   max_attempts: int = MAX_PARTITION_ATTEMPTS) -> LabelPartition:
    """Draw one labeled/unlabeled split: round-half-up(labeled_fraction * N)
    elements sampled uniformly without replacement.

    Sampling is unstratified; a draw that misses any class is retried with a
    reseeded generator up to max_attempts times, then raises naming the
    missing class. Deterministic for a fixed seed.
    """
    labels = np.asarray(labels, dtype=int)
    n = labels.size
    if n == 0:
        raise ValueError("labels must be nonempty")
    if not 0.0 < labeled_fraction < 1.0:
        raise ValueError("labeled_fraction must lie in (0, 1)")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    classes = np.unique(labels)
    m = int(labels.max()) + 1
    if classes.size < 2:
        raise ValueError("need at least 2 classes")
    if classes.size != m:
        raise ValueError("class indices must be contiguous starting at 0")
    n_labeled = int(math.floor(labeled_fraction * n + 0.5))
    if n_labeled < m:
        raise ValueError(
            f"labeled_fraction {labeled_fraction} yields {n_labeled} labeled elements, "
            f"fewer than the {m} classes"
        )
    missing = None
    for attempt in range(max_attempts):
        rng = np.random.default_rng([seed, attempt])
        chosen = rng.choice(n, size=n_labeled, replace=False)
        mask = np.zeros(n, dtype=bool)
        mask[chosen] = True
        covered = np.unique(labels[mask])
        if covered.size == m:
            return LabelPartition(labels, mask, seed=seed, n_classes=m)
        missing = int(np.setdiff1d(classes, covered)[0])
    raise ValueError(
        f"class {missing} never appeared in the labeled set after "
        f"{max_attempts} attempts (seed {seed})"
    )


def class_stats(partition: LabelPartition) -> ClassStats:
    """Counts over the full true labeling; minority is the argmin class
    (ties broken toward the lowest index)."""
    counts = np.bincount(partition.true_labels, minlength=partition.n_classes)
    minority = int(np.argmin(counts))
    ratio = float(counts.max() / counts.min())
    return ClassStats(class_counts=counts, minority_index=minority, imbalance_ratio=ratio)
