"""Graph Schur Transform and diffusion-wavelet bases for directed graphs with
defective adjacency matrices."""

from .dw import DwBasis, build_dw, dw_eigen_range, eps_span_basis
from .errors import ConvergenceError, IllConditionedError, NumericalError, PartitionError, ZeroSpectralRadius
from .graph import (
    Connectivity,
    ConnectivityClass,
    DiGraph,
    adjacency,
    connectivity_class,
    degree_matrix,
    erdos_renyi,
    is_dag,
    normalize,
)
from .graphio import load_graph, read_edge_list, read_matrix_market, save_graph, write_edge_list, write_matrix_market
from .gst import (
    AnnihilatorPolynomial,
    GainFilter,
    GstBasis,
    SpectralPartition,
    annihilator,
    apply_filter,
    build_gst,
    design_gain_filter,
    gst_forward,
    gst_inverse,
    partition_eigenvalues,
)
from .metrics import (
    DimensionVariance,
    OrthogonalityStats,
    annihilation_residual,
    cross_orthogonality,
    invariance_residual,
    subspace_dimension_variance,
)
from .spectral import (
    DefectivenessReport,
    SchurFactorization,
    Spectrum,
    eigenvalues,
    invariance_error,
    is_defective,
    nilpotent_part,
    numerical_rank,
    reorder_schur,
    schur,
    spectral_radius,
    taylor_triangular_eval,
)

__version__ = "0.1.0"
