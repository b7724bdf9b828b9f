"""Exception hierarchy.

Validation problems derive from :class:`ValidationError`; failures of the
numerical procedures themselves derive from :class:`NumericalError`.  The
command line maps the two families onto distinct exit codes.
"""


class PovmSupportError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PovmSupportError, ValueError):
    """An input violates a documented invariant."""


class NumericalError(PovmSupportError, ArithmeticError):
    """A numerical procedure could not produce a meaningful result."""


class NotHermitian(ValidationError):
    def __init__(self, index, deviation):
        self.index = index
        self.deviation = deviation
        super().__init__(f"element {index} is not Hermitian (deviation {deviation:.3e})")


class NotPsd(ValidationError):
    def __init__(self, index, min_eigenvalue):
        self.index = index
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"element {index} is not positive semidefinite "
            f"(min eigenvalue {min_eigenvalue:.3e})"
        )


class NotComplete(ValidationError):
    def __init__(self, deviation):
        self.deviation = deviation
        super().__init__(f"elements do not sum to the identity (deviation {deviation:.3e})")


class DimensionMismatch(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class InvalidStep(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class UnsupportedRing(ValidationError):
    pass


class NotInSubalgebra(ValidationError):
    def __init__(self, deviation):
        self.deviation = deviation
        super().__init__(f"operator is not in the subalgebra (deviation {deviation:.3e})")


class SingularFisher(NumericalError):
    def __init__(self, min_eigenvalue=None, message=None):
        self.min_eigenvalue = min_eigenvalue
        if message is None:
            message = "classical Fisher matrix is singular"
            if min_eigenvalue is not None:
                message += f" (min eigenvalue {min_eigenvalue:.3e})"
        super().__init__(message)


class NoDependenceFound(NumericalError):
    pass


class InsufficientNearOptimalRestarts(NumericalError):
    pass
