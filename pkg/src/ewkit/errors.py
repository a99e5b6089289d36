"""Exception hierarchy for ewkit."""


class EwkitError(ValueError):
    """Base class for every error raised by this package."""


class NonHermitianInput(EwkitError):
    pass


class ShapeMismatch(EwkitError):
    pass


class DimensionMismatch(EwkitError):
    pass


class OddDimension(DimensionMismatch):
    pass


class InvalidUnitary(EwkitError):
    pass


class InvalidPhase(EwkitError):
    pass


class NonUnimodularPhases(EwkitError):
    pass


class NormalizationError(EwkitError):
    pass


class SingularB(EwkitError):
    pass


class DegenerateWitness(EwkitError):
    pass


class PhaseOnBoundary(EwkitError):
    pass


class ConstructionInvalid(EwkitError):
    """Raised when a constructed state fails one of its certificates.

    ``check`` names the failing certificate (``"positivity"``, ``"ppt"`` or
    ``"detection"``).
    """

    def __init__(self, check: str, message: str):
        super().__init__(f"{check}: {message}")
        self.check = check


class ReconstructionFailure(EwkitError):
    pass


class MultiplierNotCP(EwkitError):
    pass


class CertificateFailed(EwkitError):
    pass


class NotTracePreserving(EwkitError):
    pass
