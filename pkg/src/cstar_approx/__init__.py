"""Distance and best approximation in block matrix algebras, under the
operator norm and the trace norm, with independently checkable dual
certificates."""

__version__ = "0.1.0"

from .algebra import (
    AlgebraElement,
    AlgebraSignature,
    AnnihilatorBasis,
    SubspaceBasis,
    annihilator_basis,
    norm,
    pairing,
    project_to_annihilator,
)
from .certificates import (
    SingerCertificate,
    SingerCheck,
    bj_orthogonal,
    check_zero_best_approx,
    is_smooth_trace,
    polar_adjoint,
    singer_decompose,
    verify_singer,
)
from .errors import (
    CertificateNotFound,
    CstarApproxError,
    DependentBasis,
    NoConvergence,
    NoFiniteN,
    NonFinite,
    NotAContraction,
    NotSmooth,
    ProblemFormatError,
    SignatureMismatch,
    TooManyDimensions,
    TooSmall,
    UnsupportedForm,
    ZeroElement,
)
from .infinite import (
    ConstantWeights,
    ExplicitWeights,
    GeometricWeights,
    TailDistanceInterval,
    TailOperator,
    Truncation,
    banded_shift_example,
    delta_ess,
    dist1_tail,
    isometry_tail_example,
    truncate,
    truncated_problem,
)
from .matrix_core import (
    PolarResult,
    SvdResult,
    polar_decompose,
    project_nuclear_ball,
    prox_schatten,
    schatten_norm,
    svd,
)
from .solver import (
    DistanceReport,
    DualCertificate,
    GridSpec,
    SolveOptions,
    VerificationRecord,
    brute_force_distance,
    extract_certificate,
    solve_distance,
    verify_certificate,
)

__all__ = [
    "__version__",
    "AlgebraElement",
    "AlgebraSignature",
    "AnnihilatorBasis",
    "SubspaceBasis",
    "annihilator_basis",
    "norm",
    "pairing",
    "project_to_annihilator",
    "SingerCertificate",
    "SingerCheck",
    "bj_orthogonal",
    "check_zero_best_approx",
    "is_smooth_trace",
    "polar_adjoint",
    "singer_decompose",
    "verify_singer",
    "CertificateNotFound",
    "CstarApproxError",
    "DependentBasis",
    "NoConvergence",
    "NoFiniteN",
    "NonFinite",
    "NotAContraction",
    "NotSmooth",
    "ProblemFormatError",
    "SignatureMismatch",
    "TooManyDimensions",
    "TooSmall",
    "UnsupportedForm",
    "ZeroElement",
    "ConstantWeights",
    "ExplicitWeights",
    "GeometricWeights",
    "TailDistanceInterval",
    "TailOperator",
    "Truncation",
    "banded_shift_example",
    "delta_ess",
    "dist1_tail",
    "isometry_tail_example",
    "truncate",
    "truncated_problem",
    "PolarResult",
    "SvdResult",
    "polar_decompose",
    "project_nuclear_ball",
    "prox_schatten",
    "schatten_norm",
    "svd",
    "DistanceReport",
    "DualCertificate",
    "GridSpec",
    "SolveOptions",
    "VerificationRecord",
    "brute_force_distance",
    "extract_certificate",
    "solve_distance",
    "verify_certificate",
]
