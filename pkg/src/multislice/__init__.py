"""Concentration on multislices: state spaces, statistics, bounds, checks."""

from multislice.bounds import REGISTRY, evaluate_bound
from multislice.convex_distance import (
    ConvexDistanceResult,
    alpha_distance,
    convex_distance,
    convex_distance_bruteforce,
)
from multislice.core import (
    EnumeratedMultislice,
    EnumeratedPrefix,
    EnumerationTooLarge,
    MultisliceSpec,
    cardinality,
    enumerate_configurations,
    prefix_cardinality,
    sample_batch,
    sample_configuration,
)
from multislice.functional import (
    CheckReport,
    FunctionTable,
    check_beckner,
    check_convex_mlsi,
    check_gradient_estimate,
    check_local_variance_identity,
    check_lsi,
    check_mlsi,
    check_moment_estimate,
    check_poincare,
    check_projection_identities,
    check_swor_lsi,
    check_swor_mlsi,
    dirichlet_form,
    entropy,
    gamma_plus_square,
    gamma_square,
    h_plus_square,
    h_square,
    lsi_constant,
    swor_lsi_constant,
)
from multislice.harness import (
    TailExperiment,
    TailReport,
    clopper_pearson,
    run_tail,
    run_talagrand_all_subsets,
    run_talagrand_exact,
    save_tail_csv,
    save_tail_metadata,
)
from multislice.stats import (
    MultilinearPolynomial,
    expected_triangles,
    kolmogorov_batch,
    sample_mean_batch,
    sample_std_batch,
    triangle_count_batch,
)
from multislice.streams import BATCH_SIZE, substream
from multislice.tensor_norms import (
    Partition,
    enumerate_partitions,
    hs_norm,
    operator_norm,
    partition_norm,
    partition_norm_detailed,
)

__version__ = "0.1.0"

__all__ = [
    "BATCH_SIZE",
    "CheckReport",
    "ConvexDistanceResult",
    "EnumeratedMultislice",
    "EnumeratedPrefix",
    "EnumerationTooLarge",
    "FunctionTable",
    "MultilinearPolynomial",
    "MultisliceSpec",
    "Partition",
    "REGISTRY",
    "TailExperiment",
    "TailReport",
    "alpha_distance",
    "check_beckner",
    "check_convex_mlsi",
    "check_gradient_estimate",
    "check_local_variance_identity",
    "check_lsi",
    "check_mlsi",
    "check_moment_estimate",
    "check_poincare",
    "check_projection_identities",
    "check_swor_lsi",
    "check_swor_mlsi",
    "clopper_pearson",
    "convex_distance",
    "convex_distance_bruteforce",
    "dirichlet_form",
    "entropy",
    "enumerate_configurations",
    "enumerate_partitions",
    "evaluate_bound",
    "expected_triangles",
    "gamma_plus_square",
    "gamma_square",
    "h_plus_square",
    "h_square",
    "hs_norm",
    "kolmogorov_batch",
    "cardinality",
    "lsi_constant",
    "operator_norm",
    "prefix_cardinality",
    "partition_norm",
    "partition_norm_detailed",
    "run_tail",
    "run_talagrand_all_subsets",
    "run_talagrand_exact",
    "sample_batch",
    "sample_configuration",
    "sample_mean_batch",
    "sample_std_batch",
    "save_tail_csv",
    "save_tail_metadata",
    "substream",
    "swor_lsi_constant",
    "triangle_count_batch",
]
