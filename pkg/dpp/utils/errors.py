"""Exception hierarchy shared by the library and the CLI"""


class DPPError(Exception):
    """Base class for every error raised by the package"""
    pass


class ValidationError(DPPError, ValueError):
    """Invalid input: broken contract, bad parameter or malformed file"""
    pass


class MatrixFormatError(ValidationError):
    pass


class ImageFormatError(ValidationError):
    pass


class CapacityError(ValidationError):
    """Problem size above a configured cap"""
    pass


class ZeroBandwidthError(ValidationError):
    pass


class NumericalError(DPPError, ArithmeticError):
    """A computation produced a result that cannot be trusted"""
    pass


class SingularMatrixError(NumericalError):
    """Cholesky pivot at `index` (1-based) fell below the pivot tolerance"""

    def __init__(self, index: int, message: str = None):
        self.index = index
        super().__init__(message or f'Matrix is singular at index {index}')

    def shifted(self, offset: int) -> 'SingularMatrixError':
        return SingularMatrixError(self.index + offset)


class ConvergenceError(NumericalError):
    pass


class NumericalConsistencyError(NumericalError):
    pass


class EnvelopeViolationError(NumericalConsistencyError):
    pass


class NumericalDegeneracyError(NumericalConsistencyError):
    pass


class UndefinedConditionalError(NumericalError):
    pass


class NoLEnsembleError(DPPError):
    """I - K is singular, so K has no L-ensemble"""
    pass


class UnreachableTargetError(DPPError):
    pass
