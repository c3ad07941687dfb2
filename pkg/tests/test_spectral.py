import numpy as np
import pytest
import scipy.sparse as sp

from dtmbo import (
    FeatureMatrix,
    KernelSpec,
    WeightGraph,
    build_laplacian,
    dense_kernel_matrix,
    eigendecompose,
    generate_synthetic,
    graph_checksum,
    load_basis,
    nystrom_decompose,
    save_basis,
)
from helpers import path_graph, random_connected_graph


def dense_sym_laplacian_eig(weights):
    """Oracle: dense eigendecomposition of I - D^{-1/2} W D^{-1/2}."""
    degrees = weights.sum(axis=1)
    scale = 1.0 / np.sqrt(degrees)
    lap = np.eye(len(weights)) - scale[:, None] * weights * scale[None, :]
    return np.linalg.eigh((lap + lap.T) / 2.0)


class TestEigendecompose:
    def test_path_graph_eigenvalues(self):
        lap = build_laplacian(path_graph(3), "unnormalized")
        basis = eigendecompose(lap, 3)
        np.testing.assert_allclose(basis.eigenvalues, [0.0, 1.0, 3.0], atol=1e-8)
        # cross-check against a dense oracle on the same matrix
        oracle = np.linalg.eigvalsh(lap.matrix.toarray())
        np.testing.assert_allclose(basis.eigenvalues, oracle, atol=1e-10)

    def test_connected_graph_null_vector_constant(self):
        rng = np.random.default_rng(0)
        lap = build_laplacian(random_connected_graph(rng, 25), "unnormalized")
        basis = eigendecompose(lap, 4)
        assert basis.eigenvalues[0] == pytest.approx(0.0, abs=1e-10)
        null = basis.eigenvectors[:, 0]
        assert np.abs(null - null.mean()).max() < 1e-8
        assert null.mean() > 0  # sign convention

    def test_disconnected_components_double_null(self):
        adj = np.zeros((6, 6))
        adj[0, 1] = adj[1, 0] = 1.0
        adj[1, 2] = adj[2, 1] = 1.0
        adj[3, 4] = adj[4, 3] = 1.0
        adj[4, 5] = adj[5, 4] = 1.0
        lap = build_laplacian(WeightGraph.from_adjacency(sp.csr_matrix(adj)), "unnormalized")
        basis = eigendecompose(lap, 3)
        assert np.abs(basis.eigenvalues[:2]).max() < 1e-8
        assert basis.eigenvalues[2] > 1e-6

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(1)
        lap = build_laplacian(random_connected_graph(rng, 30), "symmetric")
        basis = eigendecompose(lap, 10)
        gram = basis.eigenvectors.T @ basis.eigenvectors
        assert np.abs(gram - np.eye(10)).max() < 1e-6

    def test_eigen_residual(self):
        rng = np.random.default_rng(2)
        lap = build_laplacian(random_connected_graph(rng, 30), "symmetric")
        basis = eigendecompose(lap, 8)
        residual = lap.matrix @ basis.eigenvectors - basis.eigenvectors * basis.eigenvalues
        assert np.abs(residual).max() < 1e-6

    def test_prefix_stability(self):
        rng = np.random.default_rng(3)
        lap = build_laplacian(random_connected_graph(rng, 24), "unnormalized")
        small = eigendecompose(lap, 4)
        large = eigendecompose(lap, 9)
        np.testing.assert_allclose(large.eigenvalues[:4], small.eigenvalues, atol=1e-8)
        np.testing.assert_allclose(large.eigenvectors[:, :4], small.eigenvectors, atol=1e-8)

    def test_projection_energy_bound(self):
        rng = np.random.default_rng(4)
        lap = build_laplacian(random_connected_graph(rng, 30), "symmetric")
        basis = eigendecompose(lap, 12)
        phi = basis.eigenvectors
        for _ in range(20):
            v = rng.normal(size=30)
            assert np.linalg.norm(phi @ (phi.T @ v)) <= np.linalg.norm(v) + 1e-8

    def test_sign_convention_deterministic(self):
        rng = np.random.default_rng(5)
        lap = build_laplacian(random_connected_graph(rng, 20), "symmetric")
        a = eigendecompose(lap, 6)
        b = eigendecompose(lap, 6)
        np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)
        for col in a.eigenvectors.T:
            first = col[np.abs(col) > 1e-12 * np.abs(col).max()][0]
            assert first > 0

    def test_sparse_solver_path_matches_dense(self):
        rng = np.random.default_rng(6)
        lap = build_laplacian(random_connected_graph(rng, 40), "symmetric")
        dense = eigendecompose(lap, 5)
        sparse = eigendecompose(lap, 5, dense_cutoff=10)
        np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues, atol=1e-8)
        np.testing.assert_allclose(np.abs(sparse.eigenvectors), np.abs(dense.eigenvectors),
                                   atol=1e-6)

    def test_n_eigs_bounds(self):
        lap = build_laplacian(path_graph(3), "unnormalized")
        with pytest.raises(ValueError, match="n_eigs"):
            eigendecompose(lap, 4)


class TestNystrom:
    def test_full_landmarks_match_dense_oracle(self):
        rng = np.random.default_rng(7)
        fm = FeatureMatrix(rng.normal(size=(60, 4)))
        kernel = KernelSpec("gaussian", sigma=2.0)
        basis = nystrom_decompose(fm, kernel, n_eigs=10, n_landmarks=60, seed=0)
        oracle_vals, _ = dense_sym_laplacian_eig(dense_kernel_matrix(fm, kernel))
        np.testing.assert_allclose(basis.eigenvalues, oracle_vals[:10], atol=1e-6)

    def test_full_landmarks_match_exact_path(self):
        rng = np.random.default_rng(8)
        fm = FeatureMatrix(rng.normal(size=(40, 3)))
        kernel = KernelSpec("gaussian", sigma=1.5)
        basis = nystrom_decompose(fm, kernel, n_eigs=8, n_landmarks=40, seed=1)
        graph = WeightGraph.from_adjacency(sp.csr_matrix(dense_kernel_matrix(fm, kernel)))
        exact = eigendecompose(build_laplacian(graph, "symmetric"), 8)
        np.testing.assert_allclose(basis.eigenvalues, exact.eigenvalues, atol=1e-6)

    def test_blob_partition_agreement(self):
        fm, labels = generate_synthetic(200, 200, dims=2, separation=12.0, seed=9)
        kernel = KernelSpec("gaussian", sigma=2.0)
        approx = nystrom_decompose(fm, kernel, n_eigs=4, n_landmarks=100, seed=3)
        oracle_vals, oracle_vecs = dense_sym_laplacian_eig(dense_kernel_matrix(fm, kernel))
        split_exact = oracle_vecs[:, 1] >= 0
        split_approx = approx.eigenvectors[:, 1] >= 0
        agreement = max(np.mean(split_exact == split_approx),
                        np.mean(split_exact != split_approx))
        assert agreement >= 0.95
        # both sign splits should track the true blob labels
        blob_match = max(np.mean(split_approx == labels.astype(bool)),
                         np.mean(split_approx != labels.astype(bool)))
        assert blob_match >= 0.95

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(10)
        fm = FeatureMatrix(rng.normal(size=(50, 3)))
        kernel = KernelSpec("gaussian", sigma=2.0)
        a = nystrom_decompose(fm, kernel, n_eigs=5, n_landmarks=20, seed=13)
        b = nystrom_decompose(fm, kernel, n_eigs=5, n_landmarks=20, seed=13)
        np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
        np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)

    def test_eigenvalues_clipped_nonnegative_ascending(self):
        rng = np.random.default_rng(11)
        fm = FeatureMatrix(rng.normal(size=(80, 3)))
        basis = nystrom_decompose(fm, KernelSpec("gaussian", sigma=1.0),
                                  n_eigs=12, n_landmarks=30, seed=2)
        assert basis.eigenvalues.min() >= 0.0
        assert np.all(np.diff(basis.eigenvalues) >= -1e-12)

    def test_column_norms_unit(self):
        rng = np.random.default_rng(12)
        fm = FeatureMatrix(rng.normal(size=(60, 3)))
        basis = nystrom_decompose(fm, KernelSpec("gaussian", sigma=1.5),
                                  n_eigs=6, n_landmarks=25, seed=4)
        np.testing.assert_allclose(np.linalg.norm(basis.eigenvectors, axis=0), 1.0, atol=1e-12)

    def test_singular_landmark_block_raises(self):
        # duplicated rows cap the kernel block's rank below n_eigs
        base = np.random.default_rng(13).normal(size=(4, 3))
        fm = FeatureMatrix(np.vstack([base, base, base]))
        with pytest.raises(ValueError, match="landmark"):
            nystrom_decompose(fm, KernelSpec("gaussian", sigma=1.0),
                              n_eigs=6, n_landmarks=12, seed=0)

    def test_landmark_bounds(self):
        fm = FeatureMatrix(np.random.default_rng(14).normal(size=(10, 2)))
        with pytest.raises(ValueError, match="n_landmarks"):
            nystrom_decompose(fm, KernelSpec("gaussian", sigma=1.0),
                              n_eigs=5, n_landmarks=4, seed=0)


class TestBasisCache:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(15)
        graph = random_connected_graph(rng, 20)
        lap = build_laplacian(graph, "symmetric")
        basis = eigendecompose(lap, 5)
        path = tmp_path / "basis.npz"
        save_basis(basis, path, checksum=graph_checksum(graph))
        loaded = load_basis(path, expected_checksum=graph_checksum(graph))
        np.testing.assert_array_equal(loaded.eigenvalues, basis.eigenvalues)
        np.testing.assert_array_equal(loaded.eigenvectors, basis.eigenvectors)

    def test_checksum_mismatch(self, tmp_path):
        rng = np.random.default_rng(16)
        lap = build_laplacian(random_connected_graph(rng, 10), "symmetric")
        path = tmp_path / "basis.npz"
        save_basis(eigendecompose(lap, 3), path, checksum="abc")
        with pytest.raises(ValueError, match="checksum"):
            load_basis(path, expected_checksum="def")
