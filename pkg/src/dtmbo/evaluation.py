"""Classification metrics and statistical comparison of methods.

Covers the ROC curve and its area (from continuous scores and from hard
labelings), per-element residue/similarity diagnostics, and the Friedman
chi-square test with Nemenyi post-hoc critical distances for ranking methods
across data sets.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import chi2, rankdata

from .dataset import FeatureMatrix, _readonly

# Nemenyi critical values q_alpha for k = 2..20 compared methods: the upper
# quantile of the Studentized range statistic at infinite degrees of freedom
# divided by sqrt(2), as tabulated by Demsar (2006), "Statistical Comparisons
# of Classifiers over Multiple Data Sets", JMLR 7:1-30, and the standard
# critical-difference implementations that extend that table to k = 20.
_NEMENYI_Q = {
    0.05: [
        1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030879,
        3.101730, 3.163684, 3.218654, 3.268004, 3.312739, 3.353618, 3.391230,
        3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
    ],
    0.10: [
        1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884,
        2.854606, 2.919889, 2.977768, 3.029694, 3.076733, 3.119693, 3.159199,
        3.195743, 3.229723, 3.261461, 3.291224, 3.319233,
    ],
}


@dataclass(frozen=True)
class RocCurve:
    """(FPR, TPR) points ordered by descending threshold, with the area."""

    points: np.ndarray
    auc: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("points must be an (k, 2) array with k >= 2")
        if not (np.allclose(pts[0], [0.0, 0.0]) and np.allclose(pts[-1], [1.0, 1.0])):
            raise ValueError("curve must run from (0, 0) to (1, 1)")
        if np.any(np.diff(pts, axis=0) < -1e-12):
            raise ValueError("FPR and TPR must be non-decreasing along the curve")
        object.__setattr__(self, "points", _readonly(pts))

    def to_record(self) -> dict:
        return {
            "record": "roc_curve",
            "fpr": self.points[:, 0].tolist(),
            "tpr": self.points[:, 1].tolist(),
            "auc": self.auc,
        }


@dataclass(frozen=True)
class RsScores:
    """Residue (separation from other classes) and similarity (cohesion
    within the own class) per element, normalized for plotting, with the raw
    sums/averages kept alongside."""

    residue: np.ndarray
    similarity: np.ndarray
    class_id: np.ndarray
    raw_residue: np.ndarray
    raw_similarity: np.ndarray

    def __post_init__(self):
        for name in ("residue", "similarity", "raw_residue", "raw_similarity"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), dtype=float)))
        object.__setattr__(self, "class_id", _readonly(np.asarray(self.class_id, dtype=int)))


@dataclass(frozen=True)
class RankTable:
    """Friedman/Nemenyi summary: mean ranks (1 = best), the chi-square
    statistic with its p-value, and the Nemenyi critical distance."""

    methods: tuple
    datasets: tuple
    scores: np.ndarray
    mean_ranks: np.ndarray
    chi_sq: float
    p_value: float
    critical_distance: float

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        ranks = np.asarray(self.mean_ranks, dtype=float)
        if scores.shape != (len(self.datasets), len(self.methods)):
            raise ValueError("scores must be (n_datasets, n_methods)")
        if ranks.shape != (len(self.methods),):
            raise ValueError("mean_ranks must have one entry per method")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "scores", _readonly(scores))
        object.__setattr__(self, "mean_ranks", _readonly(ranks))

    def to_record(self) -> dict:
        return {
            "record": "rank_table",
            "methods": list(self.methods),
            "datasets": list(self.datasets),
            "mean_ranks": self.mean_ranks.tolist(),
            "chi_sq": self.chi_sq,
            "p_value": self.p_value,
            "critical_distance": self.critical_distance,
        }


@dataclass(frozen=True)
class RankDiagram:
    """Methods ordered by mean rank with critical-distance groupings."""

    methods: tuple
    mean_ranks: np.ndarray
    critical_distance: float
    groups: tuple

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "mean_ranks", _readonly(np.asarray(self.mean_ranks, dtype=float)))
        object.__setattr__(self, "groups", tuple(tuple(g) for g in self.groups))


def roc_auc_from_scores(scores, positives) -> RocCurve:
    """ROC curve from sweeping every distinct score threshold.

    The trapezoidal area equals the Mann-Whitney pairwise-concordance
    statistic with ties counted one half. Raises on single-class input.
    """
    s = np.asarray(scores, dtype=float).ravel()
    pos = np.asarray(positives, dtype=bool).ravel()
    if s.shape != pos.shape:
        raise ValueError("scores and positives must have equal length")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    n_pos = int(pos.sum())
    n_neg = s.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC-AUC undefined: need at least one positive and one negative")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    pos_sorted = pos[order]
    true_pos = np.cumsum(pos_sorted)
    false_pos = np.cumsum(~pos_sorted)
    boundaries = np.append(np.nonzero(np.diff(s_sorted))[0], s.size - 1)
    points = np.vstack(
        [
            [0.0, 0.0],
            np.column_stack([false_pos[boundaries] / n_neg, true_pos[boundaries] / n_pos]),
        ]
    )
    fpr, tpr = points[:, 0], points[:, 1]
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(points=points, auc=auc)


def roc_auc_from_labels(predicted, truth, positive_class) -> float:
    """(TPR + TNR) / 2 of a hard labeling: the trapezoidal area through the
    single operating point (0,0) -- (FPR, TPR) -- (1,1), one-vs-rest on the
    positive class."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth must have equal length")
    pos = truth == positive_class
    if not pos.any():
        raise ValueError(f"positive class {positive_class!r} absent from truth")
    if pos.all():
        raise ValueError("truth contains no negative elements")
    tpr = float(np.mean(predicted[pos] == positive_class))
    tnr = float(np.mean(predicted[~pos] != positive_class))
    return (tpr + tnr) / 2.0


def raw_residues(fm: FeatureMatrix, labels) -> np.ndarray:
    """Per-element sum of Euclidean distances to all other-class elements."""
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (fm.n_samples,):
        raise ValueError("labels must have one entry per sample")
    if np.unique(labels).size < 2:
        raise ValueError("residue scores need at least 2 classes")
    distances = cdist(fm.values, fm.values)
    other = labels[None, :] != labels[:, None]
    return (distances * other).sum(axis=1)


def rs_scores(fm: FeatureMatrix, labels) -> RsScores:
    """Residue and similarity scores for every element.

    Residue is the distance sum to other classes, normalized by the largest
    residue within the element's own class; similarity is the mean distance
    to own-class elements, normalized by the largest pairwise distance in the
    data set. Raises for singleton classes, whose similarity is undefined.
    """
    labels = np.asarray(labels, dtype=int)
    residue_raw = raw_residues(fm, labels)
    distances = cdist(fm.values, fm.values)
    classes = np.unique(labels)
    counts = {int(c): int((labels == c).sum()) for c in classes}
    for c, count in counts.items():
        if count < 2:
            raise ValueError(f"class {c} has a single member; similarity undefined")

    same = labels[None, :] == labels[:, None]
    np.fill_diagonal(same, False)
    similarity_raw = (distances * same).sum(axis=1) / same.sum(axis=1)

    residue = np.zeros_like(residue_raw)
    for c in classes:
        members = labels == c
        top = residue_raw[members].max()
        if top > 0:
            residue[members] = residue_raw[members] / top
    global_max = distances.max()
    similarity = similarity_raw / global_max if global_max > 0 else np.zeros_like(similarity_raw)
    return RsScores(
        residue=residue,
        similarity=similarity,
        class_id=labels,
        raw_residue=residue_raw,
        raw_similarity=similarity_raw,
    )


def friedman_nemenyi(scores, alpha: float = 0.05, methods=None, datasets=None) -> RankTable:
    """Friedman test with Nemenyi critical distance over an (n_datasets,
    n_methods) score table.

    Per-dataset ranks give 1 to the highest score, with ties averaged. The
    chi-square statistic is 12n/(k(k+1)) * (sum of squared mean ranks minus
    k(k+1)^2/4), referred to the chi-square distribution with k-1 degrees of
    freedom; the critical distance is q_alpha * sqrt(k(k+1)/(6n)) with
    q_alpha from the embedded Nemenyi table (alpha in {0.05, 0.10}, k <= 20).
    """
    table = np.asarray(scores, dtype=float)
    if table.ndim != 2:
        raise ValueError("scores must be a 2-D table (datasets x methods)")
    n, k = table.shape
    if n < 2 or k < 2:
        raise ValueError("need at least 2 data sets and 2 methods")
    q_alpha = _nemenyi_q(alpha, k)
    if methods is None:
        methods = tuple(f"method-{j + 1}" for j in range(k))
    if datasets is None:
        datasets = tuple(f"dataset-{i + 1}" for i in range(n))
    if len(methods) != k or len(datasets) != n:
        raise ValueError("method/dataset names must match the table shape")

    ranks = rankdata(-table, method="average", axis=1)
    mean_ranks = ranks.mean(axis=0)
    chi_sq = 12.0 * n / (k * (k + 1)) * (float(np.sum(mean_ranks**2)) - k * (k + 1) ** 2 / 4.0)
    p_value = float(chi2.sf(chi_sq, k - 1))
    critical = q_alpha * np.sqrt(k * (k + 1) / (6.0 * n))
    return RankTable(
        methods=tuple(methods),
        datasets=tuple(datasets),
        scores=table,
        mean_ranks=mean_ranks,
        chi_sq=float(chi_sq),
        p_value=p_value,
        critical_distance=float(critical),
    )


def _nemenyi_q(alpha: float, k: int) -> float:
    for level, row in _NEMENYI_Q.items():
        if abs(alpha - level) < 1e-12:
            if not 2 <= k <= len(row) + 1:
                raise ValueError(f"Nemenyi table covers 2 <= k <= {len(row) + 1}, got {k}")
            return row[k - 2]
    raise ValueError(f"alpha must be one of {sorted(_NEMENYI_Q)} (tabulated), got {alpha}")


def rank_diagram_data(table: RankTable) -> RankDiagram:
    """Methods sorted by mean rank ascending plus maximal groups of methods
    whose mean ranks all lie within the critical distance of each other."""
    order = np.argsort(table.mean_ranks, kind="stable")
    ranks = table.mean_ranks[order]
    names = [table.methods[i] for i in order]
    groups = []
    previous_end = -1
    for start in range(len(names)):
        end = start
        while end + 1 < len(names) and ranks[end + 1] - ranks[start] <= table.critical_distance:
            end += 1
        if end > previous_end or start == 0:
            groups.append(tuple(names[start : end + 1]))
            previous_end = end
    return RankDiagram(
        methods=tuple(names),
        mean_ranks=ranks,
        critical_distance=table.critical_distance,
        groups=tuple(groups),
    )


def format_rank_diagram(diagram: RankDiagram) -> str:
    """Plain-text rendering of the rank diagram, suitable for external
    plotting: one "mean_rank method" line per method plus group lines."""
    lines = ["# mean_rank method"]
    for rank, name in zip(diagram.mean_ranks, diagram.methods):
        lines.append(f"{rank:.6f} {name}")
    lines.append(f"# critical_distance {diagram.critical_distance:.6f}")
    for group in diagram.groups:
        lines.append("# group " + " ".join(str(g) for g in group))
    return "\n".join(lines) + "\n"
