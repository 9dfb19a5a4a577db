from .core import (
    BackendConfig,
    DensityEstimate,
    S0Evidence,
    class_data,
    empirical_principal_density,
    ideal_class_order,
    in_S0,
    is_principal,
    verify_generator,
)
from .types import BackendFailure, ClassGroupData, PrincipalityVerdict, Status

__all__ = [
    "BackendConfig",
    "BackendFailure",
    "ClassGroupData",
    "DensityEstimate",
    "PrincipalityVerdict",
    "S0Evidence",
    "Status",
    "class_data",
    "empirical_principal_density",
    "ideal_class_order",
    "in_S0",
    "is_principal",
    "verify_generator",
]
