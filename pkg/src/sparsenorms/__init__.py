"""Weakly decomposable sparsity penalties, their eigenvalue constants,
penalized least-squares solvers, and an oracle-inequality harness."""

from .cones import (
    ConeNormResult,
    FullOrthantCone,
    GroupConstantCone,
    MonotoneCone,
    RayCone,
    cone_dual_eval,
    cone_from_json,
    cone_norm_eval,
    monotone_contiguous_partition,
    pontil_maurer_bound,
    residual_cone,
)
from .core import (
    DesignMatrix,
    IndexSet,
    NoiseModel,
    draw_noise,
    load_matrix,
    normalized_norm,
    restrict,
    support,
)
from .eigenvalues import (
    EigenvalueResult,
    adaptive_restricted_eigenvalue,
    brute_force_eigenvalue,
    compatibility,
    effective_sparsity,
    l1_eigenvalue,
    omega_eigenvalue,
    omega_eigenvalue_lower_bound,
)
from .harness import (
    ExperimentConfig,
    comparison_check,
    empirical_lambdas,
    oracle_check,
    pontil_maurer_check,
    run_experiment,
    stretch_factor,
)
from .norms import (
    ConeStructuredNorm,
    GroupNorm,
    L1Norm,
    NotAllowedSetError,
    TrivialGroupNorm,
    norm_from_json,
    weak_decomposability_slack,
)
from .solvers import (
    FitResult,
    OverlapGroups,
    SolveOptions,
    omega_overlap_eval,
    solve_overlap,
    solve_penalized_ls,
    variational_inequality_check,
)

__version__ = "0.1.0"
