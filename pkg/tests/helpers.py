"""Shared fixtures-in-spirit: independent oracles and random-graph builders.

The oracles deliberately share no code with the library: the distance
correlation oracle double-centers with explicit Python loops, the simplex
oracle bisects the water-filling shift, and the AUC oracle counts concordant
pairs directly.
"""

import math

import numpy as np
import scipy.sparse as sp

from dtmbo import WeightGraph


def dcor_oracle(u, v):
    """Brute-force distance correlation: explicit O(M^2) double centering."""
    u = list(map(float, u))
    v = list(map(float, v))
    m = len(u)

    def centered(vec):
        mat = [[abs(vec[j] - vec[k]) for k in range(m)] for j in range(m)]
        row = [sum(mat[j][k] for k in range(m)) / m for j in range(m)]
        col = [sum(mat[j][k] for j in range(m)) / m for k in range(m)]
        grand = sum(row) / m
        return [[mat[j][k] - row[j] - col[k] + grand for k in range(m)] for j in range(m)]

    a = centered(u)
    b = centered(v)
    dxy = sum(a[j][k] * b[j][k] for j in range(m) for k in range(m)) / m**2
    dxx = sum(a[j][k] * a[j][k] for j in range(m) for k in range(m)) / m**2
    dyy = sum(b[j][k] * b[j][k] for j in range(m) for k in range(m)) / m**2
    sx = math.sqrt(dxx)
    sy = math.sqrt(dyy)
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return dxy / (sx * sy)


def simplex_oracle(v):
    """Simplex projection by bisecting the shift in sum(max(v - shift, 0)) = 1."""
    v = np.asarray(v, dtype=float)
    lo = float(v.min()) - 1.0
    hi = float(v.max())
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if np.clip(v - mid, 0.0, None).sum() > 1.0:
            lo = mid
        else:
            hi = mid
    return np.clip(v - (lo + hi) / 2.0, 0.0, None)


def auc_oracle(scores, positives):
    """Pairwise concordance count with ties worth one half."""
    scores = np.asarray(scores, dtype=float)
    positives = np.asarray(positives, dtype=bool)
    pos = scores[positives]
    neg = scores[~positives]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def random_weight_graph(rng, n, density=0.4):
    """Random symmetric weighted graph, weights in (0, 1], no self-loops."""
    upper = np.triu(rng.random((n, n)) < density, k=1)
    weights = np.where(upper, rng.uniform(0.05, 1.0, size=(n, n)), 0.0)
    sym = weights + weights.T
    return WeightGraph.from_adjacency(sp.csr_matrix(sym))


def random_connected_graph(rng, n, extra_density=0.2):
    """Path backbone plus random extra edges: connected, generically simple
    spectrum."""
    adj = np.zeros((n, n))
    for i in range(n - 1):
        adj[i, i + 1] = adj[i + 1, i] = rng.uniform(0.2, 1.0)
    upper = np.triu(rng.random((n, n)) < extra_density, k=2)
    extra = np.where(upper, rng.uniform(0.05, 1.0, size=(n, n)), 0.0)
    adj = adj + extra + extra.T
    return WeightGraph.from_adjacency(sp.csr_matrix(np.minimum(adj, 1.0)))


def path_graph(n):
    """Unit-weight path graph on n vertices."""
    adj = np.zeros((n, n))
    for i in range(n - 1):
        adj[i, i + 1] = adj[i + 1, i] = 1.0
    return WeightGraph.from_adjacency(sp.csr_matrix(adj))
