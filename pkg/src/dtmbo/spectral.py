"""Smallest eigenpairs of the graph Laplacian, exactly or via landmark
(Nystrom) approximation.

The exact path uses a dense symmetric eigendecomposition for moderate vertex
counts and falls back to a shift-inverted Lanczos solver beyond; the
approximate path builds the symmetric-normalized Laplacian spectrum from a
uniformly sampled landmark subset of the full kernel matrix, bypassing graph
construction entirely. Eigenvector signs are fixed (first nonzero entry of
each column positive) so results are reproducible.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla
from scipy.spatial.distance import cdist

from .dataset import FeatureMatrix, _readonly
from .graph import (
    KernelSpec,
    LaplacianSpec,
    _centered_distances,
    _dcor_from_centered,
    _self_dcov,
)

DENSE_CUTOFF = 4000
DEFAULT_N_EIGS = 50

_CACHE_SCHEMA = 1


@dataclass(frozen=True)
class SpectralBasis:
    """Ascending eigenvalues and unit-norm eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    method: str = "exact"

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=float)
        if vals.ndim != 1 or vecs.ndim != 2 or vecs.shape[1] != vals.size:
            raise ValueError("eigenvalues (k,) must match eigenvectors (n, k)")
        if np.any(np.diff(vals) < -1e-10):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", _readonly(vals))
        object.__setattr__(self, "eigenvectors", _readonly(vecs))

    @property
    def n_samples(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def n_eigs(self) -> int:
        return self.eigenvalues.size


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its first non-negligible entry is positive."""
    out = vecs.copy()
    for col in range(out.shape[1]):
        column = out[:, col]
        magnitude = np.abs(column)
        threshold = 1e-12 * magnitude.max()
        nonzero = np.nonzero(magnitude > threshold)[0]
        if nonzero.size and column[nonzero[0]] < 0:
            out[:, col] = -column
    return out


def eigendecompose(lap: LaplacianSpec, n_eigs: int, dense_cutoff: int = DENSE_CUTOFF) -> SpectralBasis:
    """Smallest n_eigs eigenpairs of the Laplacian.

    Dense solve (LAPACK, subset of the spectrum) up to dense_cutoff vertices;
    shift-inverted Lanczos beyond. Deterministic up to the fixed sign
    convention.
    """
    n = lap.graph.n
    if not 1 <= n_eigs <= n:
        raise ValueError(f"n_eigs must lie in [1, {n}], got {n_eigs}")
    if n <= dense_cutoff:
        try:
            vals, vecs = scipy.linalg.eigh(lap.matrix.toarray(), subset_by_index=(0, n_eigs - 1))
        except scipy.linalg.LinAlgError as exc:
            raise RuntimeError(f"dense eigensolver failed to converge: {exc}") from exc
    else:
        maxiter = 10 * n
        try:
            # PSD Laplacian: a small negative shift keeps the factorization
            # nonsingular while targeting the bottom of the spectrum.
            vals, vecs = spla.eigsh(lap.matrix, k=n_eigs, sigma=-1e-3, which="LM", maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            raise RuntimeError(
                f"sparse eigensolver did not converge within {maxiter} iterations: {exc}"
            ) from exc
        order = np.argsort(vals)
        vals = vals[order]
        vecs = vecs[:, order]
    return SpectralBasis(eigenvalues=vals, eigenvectors=_fix_signs(vecs), method="exact")


def nystrom_decompose(
    fm: FeatureMatrix,
    kernel: KernelSpec,
    n_eigs: int,
    n_landmarks: int,
    seed: int,
) -> SpectralBasis:
    """Approximate smallest eigenpairs of the symmetric-normalized Laplacian
    of the full kernel matrix, from uniformly sampled landmark columns.

    One-shot orthogonalized quadrature: with landmark block W_AA and cross
    block W_AB of the degree-normalized kernel, the eigenpairs of
    S = W_AA + W_AA^{-1/2} W_AB W_AB^T W_AA^{-1/2} extend to near-orthonormal
    columns over all vertices; Laplacian eigenvalues are 1 minus the kernel
    eigenvalues, clipped to >= 0. With the full landmark set this reproduces
    the exact decomposition. Columns are orthonormal only up to the
    approximation error (about 1e-6 observed at moderate sizes, looser than
    the exact path).
    """
    n = fm.n_samples
    if not 1 <= n_eigs <= n_landmarks <= n:
        raise ValueError(
            f"need n_eigs <= n_landmarks <= n_samples, got {n_eigs}, {n_landmarks}, {n}"
        )
    rng = np.random.default_rng(seed)
    landmarks = np.sort(rng.choice(n, size=n_landmarks, replace=False))
    rest = np.setdiff1d(np.arange(n), landmarks)

    landmark_fm = FeatureMatrix(fm.values[landmarks])
    columns = _kernel_columns(landmark_fm, FeatureMatrix(fm.values), kernel)
    w_aa = columns[:, landmarks]
    w_ab = columns[:, rest]

    deg_a = w_aa.sum(axis=1) + w_ab.sum(axis=1)
    # Kernel blocks are PSD but often numerically rank-deficient (smooth
    # kernels decay fast); invert on the numerically nonzero subspace and
    # refuse only when that subspace cannot carry n_eigs modes.
    mu_raw, q_raw = np.linalg.eigh((w_aa + w_aa.T) / 2.0)
    keep_raw = mu_raw > 1e-12 * mu_raw.max()
    deg_b = w_ab.sum(axis=0) + w_ab.T @ (
        (q_raw[:, keep_raw] / mu_raw[keep_raw]) @ (q_raw[:, keep_raw].T @ w_ab.sum(axis=1))
    )
    if deg_a.min() <= 0 or (deg_b.size and deg_b.min() <= 0):
        raise ValueError("nonpositive approximate degree; try more landmarks")

    norm_aa = w_aa / np.sqrt(np.outer(deg_a, deg_a))
    norm_ab = w_ab / np.sqrt(np.outer(deg_a, deg_b)) if rest.size else w_ab

    mu, q = np.linalg.eigh((norm_aa + norm_aa.T) / 2.0)
    keep = mu > 1e-12 * mu.max()
    rank = int(keep.sum())
    if rank < n_eigs:
        raise ValueError(
            f"singular landmark block (numerical rank {rank} < n_eigs {n_eigs}); "
            "try more landmarks"
        )
    inv_sqrt_aa = (q[:, keep] / np.sqrt(mu[keep])) @ q[:, keep].T
    s = norm_aa + inv_sqrt_aa @ (norm_ab @ norm_ab.T) @ inv_sqrt_aa
    kernel_vals, kernel_vecs = np.linalg.eigh((s + s.T) / 2.0)
    top = np.argsort(kernel_vals)[::-1][:n_eigs]
    lam = kernel_vals[top]
    if lam.min() <= 1e-12 * max(lam.max(), 1.0):
        raise ValueError("landmark spectrum collapsed; try more landmarks")

    extension = np.vstack([norm_aa, norm_ab.T]) @ (inv_sqrt_aa @ (kernel_vecs[:, top] / np.sqrt(lam)))
    vecs = np.empty((n, n_eigs))
    vecs[landmarks] = extension[:n_landmarks]
    vecs[rest] = extension[n_landmarks:]
    vecs /= np.linalg.norm(vecs, axis=0)

    eigenvalues = np.clip(1.0 - lam, 0.0, None)
    return SpectralBasis(eigenvalues=eigenvalues, eigenvectors=_fix_signs(vecs), method="nystrom")


def _kernel_columns(landmark_fm: FeatureMatrix, fm: FeatureMatrix, kernel: KernelSpec) -> np.ndarray:
    """Kernel values between landmark rows and all rows, shape (n_l, n)."""
    if kernel.kind == "gaussian":
        d2 = cdist(landmark_fm.values, fm.values, "sqeuclidean")
        return np.exp(-d2 / kernel.sigma**2)
    # Centered distance matrices are cached only for the landmarks
    # (n_landmarks * M^2 memory); each full row is centered once per column.
    landmark_centered = [_centered_distances(row) for row in landmark_fm.values]
    landmark_selfs = [_self_dcov(c) for c in landmark_centered]
    out = np.empty((landmark_fm.n_samples, fm.n_samples))
    for b, row in enumerate(fm.values):
        cb = _centered_distances(row)
        db = _self_dcov(cb)
        for a in range(landmark_fm.n_samples):
            out[a, b] = _dcor_from_centered(landmark_centered[a], cb, landmark_selfs[a], db)
    return out


def save_basis(basis: SpectralBasis, path, checksum: str = "") -> None:
    """Persist a basis with an (n, n_eigs, checksum) header for cache reuse."""
    meta = json.dumps(
        {
            "schema": _CACHE_SCHEMA,
            "n": basis.n_samples,
            "n_eigs": basis.n_eigs,
            "checksum": checksum,
            "method": basis.method,
        }
    )
    with open(path, "wb") as fh:
        np.savez(fh, eigenvalues=basis.eigenvalues, eigenvectors=basis.eigenvectors,
                 meta=np.array(meta))


def load_basis(path, expected_checksum: str | None = None) -> SpectralBasis:
    """Load a cached basis; raises if the stored checksum does not match."""
    with np.load(path, allow_pickle=False) as archive:
        meta = json.loads(str(archive["meta"]))
        vals = archive["eigenvalues"]
        vecs = archive["eigenvectors"]
    if meta.get("schema") != _CACHE_SCHEMA:
        raise ValueError(f"unsupported basis cache schema: {meta.get('schema')}")
    if (meta["n"], meta["n_eigs"]) != (vecs.shape[0], vals.size):
        raise ValueError("basis cache header inconsistent with stored arrays")
    if expected_checksum is not None and meta["checksum"] != expected_checksum:
        raise ValueError("basis cache checksum mismatch; graph has changed")
    return SpectralBasis(eigenvalues=vals, eigenvectors=vecs, method=meta.get("method", "exact"))
