"""Exception hierarchy shared by all modules."""


class BispectralError(Exception):
    """Base class for all errors raised by this package."""


class MixedBackend(BispectralError, TypeError):
    """Exact and approximate scalars were combined in one computation."""


class DivisionByZero(BispectralError, ZeroDivisionError):
    pass


class ApproxBackendUnsupported(BispectralError):
    """Operation requires exact arithmetic (e.g. polynomial gcd)."""


class InsufficientPrecision(BispectralError):
    """A local expansion window was too short to certify the result."""


class NoConvergence(BispectralError):
    pass


class DegenerateBasis(BispectralError):
    """Spanning set is linearly dependent (Wronskian identically zero)."""


class NotSpecial(BispectralError):
    """Exponent pattern does not match the one-defect-per-point form."""


class MissingSingularPoint(BispectralError):
    """A singular point of the space is not among the marked points."""


class NotRegularizable(BispectralError):
    """A coefficient keeps a pole after clearing with the marked points."""


class NonAdmissibleTuple(BispectralError):
    pass


class NonAdmissiblePoint(BispectralError):
    pass


class NonAdmissibleSpace(BispectralError):
    pass


class NotInPhiForm(BispectralError):
    """Second-order operator is not a combination of (x-z_r)(d-lam_s) blocks."""


class EssentialSingularity(BispectralError):
    pass


class PossiblyNonGeneric(BispectralError):
    """Critical set looks like a continuum rather than isolated points."""


class MaxStartsExceeded(BispectralError):
    pass


class KernelSolveFailed(BispectralError):
    pass


class CorrespondenceBroken(BispectralError):
    """Dual critical points disagree on the shared parameter derivatives."""


class WeightMismatch(BispectralError):
    pass


class CoincidingParameters(BispectralError):
    pass


class OutOfRange(BispectralError):
    pass


class DegreeTooHigh(BispectralError):
    pass


class DualityViolation(BispectralError):
    def __init__(self, message, index=None, residual=None):
        super().__init__(message)
        self.index = index
        self.residual = residual


class NonPolynomialCoefficients(BispectralError):
    pass


class PoleHit(BispectralError):
    pass
