"""Joint/individual decomposition of multi-block data with jackstraw
permutation inference, diagnostics, a toy-simulation harness, and a
DiProPerm two-sample test."""

__version__ = "0.1.0"

from .linalg import SvdFactors, center_rows, pca, truncated_svd, vector_angle
from .ajive import (
    AjiveDecomposition,
    BlockFit,
    DataBlock,
    ajive_decompose,
    build_indicator_block,
    select_scores,
)
from .jackstraw import (
    JackstrawConfig,
    JackstrawResult,
    LoadingTarget,
    ReplicateError,
    adjust_pvalues,
    empirical_pvalues,
    f_statistic,
    jackstraw_run,
    loading_vector,
    null_samples,
    observed_f,
    permute_rows,
)
from .diagnostics import (
    DiagnosticReport,
    build_report,
    kde,
    ks_uniform_test,
    render_svg_panels,
)
from .simulation import (
    MethodComparison,
    ToyConfig,
    ToyGroundTruth,
    accuracy,
    compare_methods,
    pair_components,
    pca_jackstraw_run,
    simulate_toy,
    true_positive_rate,
)
from .diproperm import DiProPermResult, diproperm_test, mean_diff_direction
from .io import read_block_csv, read_labels_csv, write_block_csv, write_matrix_csv

__all__ = [
    "__version__",
    "SvdFactors",
    "center_rows",
    "truncated_svd",
    "pca",
    "vector_angle",
    "DataBlock",
    "BlockFit",
    "AjiveDecomposition",
    "ajive_decompose",
    "build_indicator_block",
    "select_scores",
    "LoadingTarget",
    "JackstrawConfig",
    "JackstrawResult",
    "ReplicateError",
    "loading_vector",
    "f_statistic",
    "observed_f",
    "permute_rows",
    "null_samples",
    "empirical_pvalues",
    "adjust_pvalues",
    "jackstraw_run",
    "DiagnosticReport",
    "kde",
    "ks_uniform_test",
    "build_report",
    "render_svg_panels",
    "ToyConfig",
    "ToyGroundTruth",
    "MethodComparison",
    "simulate_toy",
    "accuracy",
    "true_positive_rate",
    "pair_components",
    "pca_jackstraw_run",
    "compare_methods",
    "DiProPermResult",
    "mean_diff_direction",
    "diproperm_test",
    "read_block_csv",
    "write_block_csv",
    "write_matrix_csv",
    "read_labels_csv",
]
