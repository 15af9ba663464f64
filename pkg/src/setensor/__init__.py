"""Verification toolkit for the strong ellipticity of fourth-order
elasticity tensors: M-eigenvalue solvers, an alternating-projection
certificate search, and the Z/M-structure classification ladder."""

from ._kernels import BACKEND as kernel_backend
from .errors import (
    Asymmetric,
    AsymmetricUnfolding,
    ConditionInapplicable,
    DimensionMismatch,
    DimensionTooLarge,
    DimensionTooSmall,
    NoConvergence,
    NonFiniteEntry,
    NotNonnegative,
    NotPsd,
    ParseError,
    SetensorError,
    SymmetryViolation,
)
from .m_class import (
    NONSINGULAR_M,
    NOT_M,
    NOT_Z,
    SINGULAR_M_BOUNDARY,
    ClassificationReport,
    ConditionResult,
    ZPattern,
    check_condition,
    classify,
    classify_with_battery,
    is_nonsingular_m_matrix,
    run_condition_battery,
    z_pattern,
)
from .m_eigen import (
    MEigenpair,
    MSpectrum,
    enumerate_spectrum,
    is_irreducible,
    power_method_max,
    power_method_min,
    spectral_radius_nonneg,
)
from .se_pocs import (
    CERTIFIED_M_PD,
    CERTIFIED_M_PSD,
    INCONCLUSIVE,
    PocsOutcome,
    PocsState,
    PsdCertificate,
    default_epsilon,
    extract_certificate,
    pocs_verify,
    project_affine,
    project_psd,
)
from .tensor_core import (
    ElasticityTensor,
    GeneralTensor4,
    UnfoldedMatrix,
    contract_xxy,
    contract_xxyy,
    contract_xyy,
    identity_tensor,
    load_tensor,
    new_elasticity_tensor,
    new_general_tensor4,
    partial_xx,
    partial_yy,
    save_tensor,
    shift,
    shuffle_permutation,
    tensor_from_dict,
    tensor_to_dict,
    unfold,
)

__version__ = "0.1.0"

__all__ = [
    "kernel_backend",
    "__version__",
    # errors
    "SetensorError", "DimensionTooSmall", "DimensionTooLarge",
    "DimensionMismatch", "NonFiniteEntry", "SymmetryViolation",
    "NotNonnegative", "NoConvergence", "AsymmetricUnfolding", "NotPsd",
    "Asymmetric", "ConditionInapplicable", "ParseError",
    # tensor core
    "ElasticityTensor", "GeneralTensor4", "UnfoldedMatrix",
    "new_elasticity_tensor", "new_general_tensor4", "identity_tensor",
    "contract_xxyy", "contract_xyy", "contract_xxy", "partial_xx",
    "partial_yy", "unfold", "shuffle_permutation", "shift", "load_tensor",
    "save_tensor", "tensor_from_dict", "tensor_to_dict",
    # eigen solvers
    "MEigenpair", "MSpectrum", "power_method_max", "power_method_min",
    "enumerate_spectrum", "spectral_radius_nonneg", "is_irreducible",
    # certificates
    "PocsState", "PocsOutcome", "PsdCertificate", "project_affine",
    "project_psd", "pocs_verify", "extract_certificate", "default_epsilon",
    "CERTIFIED_M_PSD", "CERTIFIED_M_PD", "INCONCLUSIVE",
    # classification
    "ZPattern", "ConditionResult", "ClassificationReport", "z_pattern",
    "classify", "classify_with_battery", "check_condition",
    "run_condition_battery", "is_nonsingular_m_matrix",
    "NOT_Z", "NONSINGULAR_M", "SINGULAR_M_BOUNDARY", "NOT_M",
]
