"""Graph-based semi-supervised classification for imbalanced data.

The pipeline: load and standardize features, build a k-nearest-neighbor
similarity graph (Gaussian or distance-correlation weights), take the
smallest Laplacian eigenpairs (exactly or by landmark approximation), run
threshold-dynamics label propagation with a minority-class decision
threshold sweep, and select the threshold with the best score on the
unlabeled elements. A repeated-split harness aggregates scores and ranks
competing methods with Friedman/Nemenyi statistics.
"""

from .dataset import (
    ClassStats,
    FeatureMatrix,
    LabelPartition,
    ParseError,
    class_stats,
    load_features,
    load_labels,
    load_seeds,
    make_partition,
    standardize,
)
from .evaluation import (
    RankDiagram,
    RankTable,
    RocCurve,
    RsScores,
    format_rank_diagram,
    friedman_nemenyi,
    rank_diagram_data,
    raw_residues,
    roc_auc_from_labels,
    roc_auc_from_scores,
    rs_scores,
)
from .graph import (
    KernelSpec,
    LaplacianSpec,
    WeightGraph,
    build_knn_graph,
    build_laplacian,
    dense_kernel_matrix,
    distance_correlation,
    gaussian_weight,
    graph_checksum,
    write_graph_dump,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    SplitFailure,
    SplitRecord,
    compare_methods,
    config_from_mapping,
    generate_synthetic,
    load_config,
    parse_config_text,
    read_method_scores,
    report_records,
    run_experiment,
    write_report,
)
from .mbo import (
    DiffusionState,
    LabelMatrix,
    MboConfig,
    ThresholdSweepResult,
    diffusion_step,
    initialize_labels,
    project_rows_to_simplex,
    project_to_simplex,
    run_dt_mbo,
    threshold_displace,
)
from .spectral import (
    SpectralBasis,
    eigendecompose,
    load_basis,
    nystrom_decompose,
    save_basis,
)

__version__ = "0.1.0"
