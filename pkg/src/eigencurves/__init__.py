"""Critical points of eigencurves of bivariate matrix pencils.

The central object is the pencil W(lambda, mu) = A + lambda*B + mu*C. Its
eigencurves are the solution set of det W = 0 in the (lambda, mu) plane, and
the critical points are the spots where mu stops being a locally smooth simple
function of lambda: stationary points of a single curve branch and points
where branches meet. The package computes these points globally (through an
associated doubled eigenvalue problem, solved either directly as a singular
pencil or through random projection) and locally (Gauss-Newton refinement),
classifies each point, and applies the machinery to eigenvalue optimization,
distance to instability, double eigenvalues, quadratic eigenvalue problems
and Sturm-Liouville spectra.
"""

from .applications import (
    InvalidWeight,
    NotHermitian,
    NotIndefinite,
    NotStable,
    SingularLeadingCoeff,
    SturmLiouvilleDiscretization,
    TwoDEigenvalue,
    discretize_sturm_liouville,
    distance_to_instability,
    double_eigenvalue_points,
    mathieu_discretization,
    qep_zgv,
    sturm_liouville_critical,
    twod_eigenvalues,
)
from .linalg import (
    EigentripleSet,
    SingularPencil,
    gep_solve,
    haar_unitary,
    numerical_rank,
)
from .oracle import BivariatePoly, char_poly, common_roots, zgv_oracle
from .pencil import BivariatePencil, MultiplicityEstimate, estimate_multiplicity
from .points import (
    ALL_KINDS,
    KIND_A,
    KIND_B,
    KIND_C,
    KIND_D,
    KIND_ZGV,
    CriticalPoint,
    NotBiregular,
    NotCritical,
    NotOnCurve,
    PipelineReport,
    ProjectedCandidate,
    RejectedCandidate,
    classify_point,
    critical_points_direct,
    critical_points_projected,
    dedup_points,
)
from .refine import (
    DivergedIterate,
    GaussNewtonState,
    MfrdCandidate,
    NoConvergence,
    gauss_newton_2d,
    init_vectors_svd,
    mfrd_candidates,
    mfrd_refine_all,
)
from .singgep import (
    FilteredEigenvalue,
    ProjectedPencilSingular,
    normal_rank_estimate,
    singular_gep_eigenvalues,
)
from .twopar import (
    DeltaOperators,
    SingularDelta0,
    TwoParamEigenpair,
    TwoParamProblem,
    build_deltas,
    build_detuned_problem,
    build_zgv_problem,
    solve_regular_2ep,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_KINDS",
    "BivariatePencil",
    "BivariatePoly",
    "CriticalPoint",
    "DeltaOperators",
    "DivergedIterate",
    "EigentripleSet",
    "FilteredEigenvalue",
    "GaussNewtonState",
    "InvalidWeight",
    "KIND_A",
    "KIND_B",
    "KIND_C",
    "KIND_D",
    "KIND_ZGV",
    "MfrdCandidate",
    "MultiplicityEstimate",
    "NoConvergence",
    "NotBiregular",
    "NotCritical",
    "NotHermitian",
    "NotIndefinite",
    "NotOnCurve",
    "NotStable",
    "PipelineReport",
    "ProjectedCandidate",
    "ProjectedPencilSingular",
    "RejectedCandidate",
    "SingularDelta0",
    "SingularLeadingCoeff",
    "SingularPencil",
    "SturmLiouvilleDiscretization",
    "TwoDEigenvalue",
    "TwoParamEigenpair",
    "TwoParamProblem",
    "build_deltas",
    "build_detuned_problem",
    "build_zgv_problem",
    "char_poly",
    "classify_point",
    "common_roots",
    "critical_points_direct",
    "critical_points_projected",
    "dedup_points",
    "discretize_sturm_liouville",
    "distance_to_instability",
    "double_eigenvalue_points",
    "estimate_multiplicity",
    "gauss_newton_2d",
    "gep_solve",
    "haar_unitary",
    "init_vectors_svd",
    "mathieu_discretization",
    "mfrd_candidates",
    "mfrd_refine_all",
    "normal_rank_estimate",
    "numerical_rank",
    "qep_zgv",
    "singular_gep_eigenvalues",
    "solve_regular_2ep",
    "sturm_liouville_critical",
    "twod_eigenvalues",
    "zgv_oracle",
    "__version__",
]
