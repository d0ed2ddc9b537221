"""Bootstrap bound-state solver: moment recursions, positivity matrices,
feasibility scans, and an independent finite-difference cross-check."""

from .errors import (
    BadParameter,
    ConfigParse,
    DomainTooSmall,
    EngineError,
    IncompleteTable,
    Io,
    MissingInitial,
    NonConfining,
    NonIntegrableMoment,
    NonSmoothPotential,
    NumericalFailure,
    Overflow,
    UnknownInitialData,
    UnsupportedFamily,
)
from .feasibility import FeasibilityVerdict, is_feasible, min_eigenvalue
from .matrices import (
    ONE_OP_KINDS,
    TWO_OP_KINDS,
    BootstrapMatrix,
    MatrixKind,
    build_matrix,
    build_one_op,
    build_two_op,
    matrix_dimension,
)
from .oracle import (
    OracleSolution,
    decay_rate,
    moments_from_wavefunction,
    solve_1d,
    solve_periodic,
    solve_radial,
)
from .potentials import (
    Family,
    PotentialSpec,
    ValidatedPotential,
    evaluate_potential,
    free_initial_schema,
    validate_spec,
)
from .recursion import (
    InitialData,
    MomentTable,
    gen_one_var,
    gen_two_var,
    initial_from_values,
    recursion_residual,
)
from .scanner import (
    FeasibleRegion,
    Island,
    ScanAxis,
    ScanConfig,
    ScanPoint,
    extract_islands,
    refine_boundary,
    run_scan,
)

__version__ = "0.1.0"

__all__ = [
    "BadParameter",
    "BootstrapMatrix",
    "ConfigParse",
    "DomainTooSmall",
    "EngineError",
    "Family",
    "FeasibilityVerdict",
    "FeasibleRegion",
    "IncompleteTable",
    "InitialData",
    "Io",
    "Island",
    "MatrixKind",
    "MissingInitial",
    "MomentTable",
    "NonConfining",
    "NonIntegrableMoment",
    "NonSmoothPotential",
    "NumericalFailure",
    "ONE_OP_KINDS",
    "OracleSolution",
    "Overflow",
    "PotentialSpec",
    "ScanAxis",
    "ScanConfig",
    "ScanPoint",
    "TWO_OP_KINDS",
    "UnknownInitialData",
    "UnsupportedFamily",
    "ValidatedPotential",
    "build_matrix",
    "build_one_op",
    "build_two_op",
    "decay_rate",
    "evaluate_potential",
    "extract_islands",
    "free_initial_schema",
    "gen_one_var",
    "gen_two_var",
    "initial_from_values",
    "is_feasible",
    "matrix_dimension",
    "min_eigenvalue",
    "moments_from_wavefunction",
    "recursion_residual",
    "refine_boundary",
    "run_scan",
    "solve_1d",
    "solve_periodic",
    "solve_radial",
    "validate_spec",
    "__version__",
]
