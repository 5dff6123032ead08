"""Normal surfaces, angle structures and volume on triangulated pseudo 3-manifolds."""

from .errors import (
    BadPermutation,
    ClaimViolation,
    DegenerateShape,
    DualityViolation,
    IdentityViolation,
    InconsistencySentinel,
    NonOrientable,
    NotApplicable,
    NotDegenerating,
    NotInTASperp,
    SelfFaceGluing,
    Spine3Error,
    UngluedFace,
    ValidationError,
)
from .triangulation import Triangulation, load, parse_and_validate

__all__ = [
    "BadPermutation",
    "ClaimViolation",
    "DegenerateShape",
    "DualityViolation",
    "IdentityViolation",
    "InconsistencySentinel",
    "NonOrientable",
    "NotApplicable",
    "NotDegenerating",
    "NotInTASperp",
    "SelfFaceGluing",
    "Spine3Error",
    "Triangulation",
    "UngluedFace",
    "ValidationError",
    "load",
    "parse_and_validate",
]

__version__ = "0.1.0"
