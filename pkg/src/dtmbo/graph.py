"""Similarity graphs: pairwise weight kernels, k-nearest-neighbor
construction, and graph Laplacians.

Two weight kernels are supported, both mapping into [0, 1]:

* ``gaussian`` -- exp(-d(i,j)^2 / sigma^2) with Euclidean d and a single
  global bandwidth sigma.
* ``distance_correlation`` -- the normalized double-centered distance
  covariance ratio between two feature vectors, which is 1 exactly under
  linear dependence and 0 for independent (or constant) vectors.

Neighbor selection always uses Euclidean distance on the feature rows; the
kernel only supplies edge weights. Graphs are union-symmetrized (an edge is
kept if either endpoint selects it), which preserves connectivity for the
diffusion downstream. All resulting containers are immutable.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .dataset import FeatureMatrix, _readonly

KERNEL_KINDS = ("gaussian", "distance_correlation")
NORMALIZATIONS = ("unnormalized", "symmetric")


@dataclass(frozen=True)
class KernelSpec:
    """Weight-kernel choice; sigma applies to the gaussian kernel only."""

    kind: str
    sigma: float | None = None
    metric: str = "euclidean"

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        if self.metric != "euclidean":
            raise ValueError(f"unsupported metric {self.metric!r}")
        if self.kind == "gaussian":
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("gaussian kernel requires sigma > 0")
        elif self.sigma is not None:
            raise ValueError("sigma applies to the gaussian kernel only")


@dataclass(frozen=True)
class WeightGraph:
    """Sparse symmetric nonnegative similarity weights plus vertex degrees."""

    n: int
    adjacency: sp.csr_matrix
    degrees: np.ndarray

    def __post_init__(self):
        adj = sp.csr_matrix(self.adjacency)
        adj.sort_indices()
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "degrees", _readonly(np.asarray(self.degrees, dtype=float)))

    @classmethod
    def from_adjacency(cls, adjacency) -> "WeightGraph":
        """Wrap a symmetric weight matrix, computing degrees as row sums.

        The matrix must be exactly symmetric with entries in [0, 1].
        """
        adj = sp.csr_matrix(adjacency)
        if adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if (adj != adj.T).nnz != 0:
            raise ValueError("adjacency must be exactly symmetric")
        if adj.nnz and (adj.data.min() < 0.0 or adj.data.max() > 1.0):
            raise ValueError("weights must lie in [0, 1]")
        degrees = np.asarray(adj.sum(axis=1)).ravel()
        return cls(n=adj.shape[0], adjacency=adj, degrees=degrees)

    @property
    def n_edges(self) -> int:
        """Number of undirected edges (self-loops counted once)."""
        diag_nnz = int(np.count_nonzero(self.adjacency.diagonal()))
        return (self.adjacency.nnz - diag_nnz) // 2 + diag_nnz


@dataclass(frozen=True)
class LaplacianSpec:
    """A graph Laplacian in one of two normalizations, with its source graph."""

    normalization: str
    graph: WeightGraph
    matrix: sp.csr_matrix


def gaussian_weight(xi, xj, sigma: float) -> float:
    """exp(-d(i,j)^2 / sigma^2) with Euclidean d; 1.0 at zero distance."""
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    if xi.shape != xj.shape:
        raise ValueError(f"dimension mismatch: {xi.shape} vs {xj.shape}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    d2 = float(np.sum((xi - xj) ** 2))
    return float(np.exp(-d2 / sigma**2))


def _centered_distances(z: np.ndarray) -> np.ndarray:
    """Double-centered matrix of pairwise absolute differences of z."""
    a = np.abs(z[:, None] - z[None, :])
    return a - a.mean(axis=0)[None, :] - a.mean(axis=1)[:, None] + a.mean()


def _self_dcov(centered: np.ndarray) -> float:
    m = centered.shape[0]
    return float(np.sqrt((centered * centered).sum() / m**2))


def _dcor_from_centered(ci: np.ndarray, cj: np.ndarray, di: float, dj: float) -> float:
    if di == 0.0 or dj == 0.0:
        return 0.0
    m = ci.shape[0]
    dcov2 = (ci * cj).sum() / m**2
    return float(min(max(dcov2 / (di * dj), 0.0), 1.0))


def distance_correlation(zi, zj) -> float:
    """Distance correlation between two equal-length feature vectors.

    Built from pairwise-distance matrices, double centering, and the squared
    distance covariance; the value is the ratio of the cross dcov^2 to the
    product of the self distance covariances, in [0, 1]. Returns 0.0 when
    either self-covariance vanishes (constant vector).
    """
    zi = np.asarray(zi, dtype=float)
    zj = np.asarray(zj, dtype=float)
    if zi.ndim != 1 or zj.ndim != 1 or zi.shape != zj.shape:
        raise ValueError("inputs must be equal-length 1-D vectors")
    if zi.size < 2:
        raise ValueError("distance correlation requires length >= 2")
    ci = _centered_distances(zi)
    cj = _centered_distances(zj)
    return _dcor_from_centered(ci, cj, _self_dcov(ci), _self_dcov(cj))


def build_knn_graph(fm: FeatureMatrix, n_neighbors: int, kernel: KernelSpec) -> WeightGraph:
    """Connect each vertex to its n_neighbors Euclidean nearest neighbors,
    union-symmetrize, and weight edges with the kernel.

    Exact O(N^2 D) neighbor search; distance ties break toward the lower
    vertex index. Self-loops are excluded, so degrees are off-diagonal row
    sums.
    """
    x = fm.values
    n = fm.n_samples
    if not 1 <= n_neighbors < n:
        raise ValueError(f"n_neighbors must lie in [1, {n - 1}], got {n_neighbors}")
    d2 = cdist(x, x, "sqeuclidean")
    np.fill_diagonal(d2, np.inf)
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :n_neighbors]

    src = np.repeat(np.arange(n), n_neighbors)
    dst = nearest.ravel()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)

    if kernel.kind == "gaussian":
        weights = np.exp(-d2[pairs[:, 0], pairs[:, 1]] / kernel.sigma**2)
    else:
        weights = _dcor_edge_weights(x, pairs)

    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    data = np.concatenate([weights, weights])
    adjacency = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    return WeightGraph.from_adjacency(adjacency)


def _dcor_edge_weights(x: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """Distance-correlation weights for an (n_pairs, 2) edge list, reusing
    the first endpoint's centered matrix across its run of edges."""
    weights = np.empty(len(pairs))
    cached_i = -1
    ci = di = None
    for e, (i, j) in enumerate(pairs):
        if i != cached_i:
            ci = _centered_distances(x[i])
            di = _self_dcov(ci)
            cached_i = i
        cj = _centered_distances(x[j])
        weights[e] = _dcor_from_centered(ci, cj, di, _self_dcov(cj))
    return weights


def build_laplacian(graph: WeightGraph, normalization: str = "symmetric") -> LaplacianSpec:
    """L = D - W, or the symmetric normalization I - D^{-1/2} W D^{-1/2}
    where isolated vertices (zero degree) contribute identity rows."""
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}")
    w = graph.adjacency
    d = graph.degrees
    if normalization == "unnormalized":
        lap = sp.diags(d) - w
    else:
        inv_sqrt = np.zeros_like(d)
        positive = d > 0
        inv_sqrt[positive] = 1.0 / np.sqrt(d[positive])
        scale = sp.diags(inv_sqrt)
        lap = sp.identity(graph.n, format="csr") - scale @ w @ scale
    lap = sp.csr_matrix(lap)
    lap.sort_indices()
    return LaplacianSpec(normalization=normalization, graph=graph, matrix=lap)


def dense_kernel_matrix(fm: FeatureMatrix, kernel: KernelSpec) -> np.ndarray:
    """Full N x N kernel matrix including the diagonal (the landmark-sampling
    eigensolver quadrature needs whole columns). O(N^2 M^2) for the
    distance-correlation kernel."""
    x = fm.values
    n = fm.n_samples
    if kernel.kind == "gaussian":
        return np.exp(-cdist(x, x, "sqeuclidean") / kernel.sigma**2)
    centered = [_centered_distances(x[i]) for i in range(n)]
    selfs = [_self_dcov(c) for c in centered]
    out = np.empty((n, n))
    for i in range(n):
        out[i, i] = 1.0 if selfs[i] > 0 else 0.0
        for j in range(i + 1, n):
            w = _dcor_from_centered(centered[i], centered[j], selfs[i], selfs[j])
            out[i, j] = w
            out[j, i] = w
    return out


def write_graph_dump(graph: WeightGraph, path) -> None:
    """Dump the adjacency as coordinate-list text, one "i j w" line per
    stored entry, 0-indexed, full-precision weights, ordered by (i, j)."""
    coo = graph.adjacency.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as fh:
        for k in order:
            fh.write(f"{int(coo.row[k])} {int(coo.col[k])} {float(coo.data[k])!r}\n")


def graph_checksum(graph: WeightGraph) -> str:
    """SHA-256 over the canonical CSR arrays; identifies a graph for caching."""
    adj = graph.adjacency
    digest = hashlib.sha256()
    digest.update(np.asarray(adj.shape, dtype=np.int64).tobytes())
    digest.update(adj.indptr.astype(np.int64).tobytes())
    digest.update(adj.indices.astype(np.int64).tobytes())
    digest.update(adj.data.astype(np.float64).tobytes())
    return digest.hexdigest()
