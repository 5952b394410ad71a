"""Numerical laboratory for mean-value identities on geodesic balls."""

from .errors import (
    AccuracyError,
    ConjugatePointError,
    ContractViolation,
    DomainError,
    HorolabError,
    PreconditionError,
    ShootingError,
    UsageError,
)
from .manifolds import (
    ConformalFactor,
    ConformalSurface,
    Euclidean,
    Hyperboloid,
    Manifold,
    Sphere,
    TangentVector,
)
from .integrals import DEFAULT_QUADRATURE, Quadrature
from .identities import IdentityReport, KInfinityScan, ScalarField
from .catalog import get_field, get_manifold, list_catalog

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConjugatePointError",
    "ContractViolation",
    "DomainError",
    "HorolabError",
    "PreconditionError",
    "ShootingError",
    "UsageError",
    "ConformalFactor",
    "ConformalSurface",
    "Euclidean",
    "Hyperboloid",
    "Manifold",
    "Sphere",
    "TangentVector",
    "DEFAULT_QUADRATURE",
    "Quadrature",
    "IdentityReport",
    "KInfinityScan",
    "ScalarField",
    "get_field",
    "get_manifold",
    "list_catalog",
]
