"""Exact versus landmark-approximated Laplacian spectra.

The diffusion only ever sees the smallest eigenpairs of the graph Laplacian.
For moderate data the exact dense decomposition is cheap; for large data the
landmark (Nystrom) path approximates the spectrum of the full-kernel
symmetric-normalized Laplacian from a uniform sample of columns. This script
compares the two on a data set small enough to afford both.
"""

import numpy as np

from dtmbo import (
    KernelSpec,
    WeightGraph,
    build_laplacian,
    dense_kernel_matrix,
    eigendecompose,
    generate_synthetic,
    nystrom_decompose,
)
import scipy.sparse as sp

features, labels = generate_synthetic(n_majority=150, n_minority=150, dims=2,
                                      separation=10.0, seed=3)
kernel = KernelSpec("gaussian", sigma=2.0)

# Exact path on the full kernel matrix (diagonal included, matching what the
# landmark quadrature approximates).
full = dense_kernel_matrix(features, kernel)
graph = WeightGraph.from_adjacency(sp.csr_matrix(full))
exact = eigendecompose(build_laplacian(graph, "symmetric"), n_eigs=6)

# Landmark path from a quarter of the columns.
approx = nystrom_decompose(features, kernel, n_eigs=6, n_landmarks=75, seed=0)

print("eigenvalue   exact      landmark   |gap|")
for k in range(6):
    gap = abs(exact.eigenvalues[k] - approx.eigenvalues[k])
    print(f"  {k}         {exact.eigenvalues[k]:.6f}   {approx.eigenvalues[k]:.6f}   {gap:.2e}")

# With two well-separated blobs the second eigenvector's sign splits them.
split = approx.eigenvectors[:, 1] >= 0
agreement = max(np.mean(split == labels.astype(bool)),
                np.mean(split != labels.astype(bool)))
print(f"\nsecond-eigenvector sign split matches the true blobs on "
      f"{agreement:.1%} of points")
