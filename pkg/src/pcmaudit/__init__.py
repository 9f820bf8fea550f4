"""Priority weights, Saaty consistency, and monotonicity audits for
multiplicative pairwise comparison matrices."""

__version__ = "0.1.0"

from .consistency import (
    InconsistencyReport,
    RandomIndexTable,
    consistency_index,
    consistency_ratio,
    default_random_index_table,
    estimate_random_index,
)
from .errors import ConfigurationError, ConvergenceError, MatrixParseError, ValidationError
from .generate import GeneratorConfig, SAATY_VALUES, generate, generate_batch
from .matrix import (
    PairwiseComparisonMatrix,
    PerturbationSpec,
    build_matrix,
    consistent_from_weights,
    from_array,
    is_consistent,
    parse_matrix,
    perturb,
    read_matrix_file,
    write_matrix_file,
)
from .monotonic import (
    MonotonicityReport,
    ViolationRecord,
    check_monotonicity,
    min_violation_factor_scan,
)
from .simulate import CrHistogram, MinCrExample, run_simulation
from .sweep import enumerate_n4_discrete
from .weights import EigenResult, WeightVector, eigenvector_method, row_geometric_mean

__all__ = [
    "__version__",
    "ConfigurationError",
    "ConvergenceError",
    "CrHistogram",
    "EigenResult",
    "GeneratorConfig",
    "InconsistencyReport",
    "MatrixParseError",
    "MinCrExample",
    "MonotonicityReport",
    "PairwiseComparisonMatrix",
    "PerturbationSpec",
    "RandomIndexTable",
    "SAATY_VALUES",
    "ValidationError",
    "ViolationRecord",
    "WeightVector",
    "build_matrix",
    "check_monotonicity",
    "consistency_index",
    "consistency_ratio",
    "consistent_from_weights",
    "default_random_index_table",
    "enumerate_n4_discrete",
    "estimate_random_index",
    "eigenvector_method",
    "from_array",
    "generate",
    "generate_batch",
    "is_consistent",
    "min_violation_factor_scan",
    "parse_matrix",
    "perturb",
    "read_matrix_file",
    "row_geometric_mean",
    "run_simulation",
    "write_matrix_file",
]
