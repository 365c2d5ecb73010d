"""Exception hierarchy shared by all modules."""


class DegaussError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(DegaussError, ValueError):
    """Input is malformed: non-finite entries, asymmetric or indefinite covariance."""


class ContractViolation(DegaussError, ValueError):
    """A documented precondition of an operation does not hold."""


class ScopeError(ContractViolation):
    """Variable names or dimensions are inconsistent between operands."""


class NotNormalisableError(DegaussError, ArithmeticError):
    """The factor has a zero precision direction, so it has no finite mass."""


class InfiniteVarianceError(NotNormalisableError):
    """Moments were requested from a factor with a zero precision direction."""


class DegeneracyDetectedError(DegaussError, ArithmeticError):
    """A canonical operation needed to invert a singular block."""


class DivergentIntegralError(DegaussError, ArithmeticError):
    """Marginalisation over a direction with zero precision."""


class IndefiniteQuotientError(DegaussError, ArithmeticError):
    """Division produced a precision matrix with negative eigenvalues."""


class PropagationError(DegaussError, ArithmeticError):
    """A black-box function returned non-finite values on a sigma point."""


class InferenceInconsistency(DegaussError):
    """Message passing hit contradictory hard constraints.

    :param cluster: label of the cluster whose message became the zero factor
    """

    def __init__(self, message, cluster=None):
        super().__init__(message)
        self.cluster = cluster
