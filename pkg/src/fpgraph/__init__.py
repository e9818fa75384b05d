"""Family preserving metric graphs and their one-dimensional reductions."""

from .balancing import BalanceResult, bad_generations, balance, is_locally_balanced
from .discrete import (
    Branch,
    DiscreteDecomposition,
    JacobiData,
    SphereVector,
    branch_jacobi,
    decompose_discrete,
    e_matrix,
    joint_eigenbasis,
    lambda_op,
)
from .generators import (
    Preset,
    antitree,
    cyclic_graph,
    gamma_tilde,
    generate,
    ns_reference_vector,
    path_graph,
    radial_tree,
    sphere_product,
)
from .graph import (
    ConeProfile,
    LayeredGraph,
    MetricLayers,
    cone_profiles,
    path_count_matrix,
    to_dot,
    validate_graph,
)
from .pipeline import PipelineConfig, run_pipeline
from .reduction import (
    EdgeWeights,
    Jump,
    ReducedOperator,
    build_reduced_operator,
    jump_data,
    lift_weights,
    reduce_decomposition,
    support_window,
)
from .spectral import (
    ComparisonReport,
    Spectrum,
    SpectrumEntry,
    compare_spectra,
    full_spectrum_fd,
    full_spectrum_secular,
    reduced_spectrum,
)
from .symmetry import SymmetryVerdict, check_family_preserving, check_lambda_commutation

__version__ = "0.1.0"
