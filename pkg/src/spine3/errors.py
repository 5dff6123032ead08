"""Exception hierarchy.

Errors fall in three groups: bad input (``ValidationError``), violated
preconditions of a numerical routine, and ``InconsistencySentinel`` which
signals that an identity that must hold by theory failed, i.e. a bug.
"""


class Spine3Error(Exception):
    pass


class ValidationError(Spine3Error):
    """The triangulation file does not describe a closed oriented pseudo 3-manifold."""


class UngluedFace(ValidationError):
    pass


class BadPermutation(ValidationError):
    pass


class NonOrientable(ValidationError):
    pass


class SelfFaceGluing(ValidationError):
    pass


class InconsistencySentinel(Spine3Error):
    """A mathematical identity failed; carries the witnessing data."""

    def __init__(self, message, witnesses=None):
        super().__init__(message)
        self.witnesses = list(witnesses or [])


class IdentityViolation(InconsistencySentinel):
    pass


class DualityViolation(InconsistencySentinel):
    pass


class ClaimViolation(InconsistencySentinel):
    pass


class PreconditionError(Spine3Error):
    pass


class NotInTASperp(PreconditionError):
    pass


class InitFailure(Spine3Error):
    pass


class DegenerateShape(PreconditionError):
    pass


class NotDegenerating(PreconditionError):
    pass


class NotApplicable(PreconditionError):
    pass


class InconsistentReport(PreconditionError):
    pass
