import logging
from functools import wraps
from typing import Iterable

import click
import numpy as np

from dpp.utils.errors import (
    ValidationError, NumericalConsistencyError, NumericalError, DPPError
)

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-10


def validate_square(matrix, name: str = 'matrix') -> np.ndarray:
    """Return `matrix` as a 2-D square ndarray"""
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f'{name} must be square, got shape {arr.shape}')
    if not np.issubdtype(arr.dtype, np.number):
        raise ValidationError(f'{name} must be numeric')
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128, copy=False)
    return arr.astype(np.float64, copy=False)


def hermitian_defect(matrix: np.ndarray) -> float:
    """Largest |M(i,j) - conj(M(j,i))|"""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def is_hermitian(matrix: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    return hermitian_defect(matrix) <= rtol * max(1.0, scale)


def validate_hermitian(matrix, name: str = 'matrix', rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate a square Hermitian matrix"""
    arr = validate_square(matrix, name)
    if not is_hermitian(arr, rtol):
        raise ValidationError(
            f'{name} is not Hermitian (defect {hermitian_defect(arr):.3e})'
        )
    return arr


def hermitize(matrix: np.ndarray) -> np.ndarray:
    """Average with the conjugate transpose"""
    return 0.5 * (matrix + matrix.conj().T)


def validate_index_set(indices: Iterable[int], n: int, name: str = 'index set') -> np.ndarray:
    """Validate 1-based indices and return them as sorted 0-based positions"""
    values = [int(i) for i in (indices or ())]
    if len(set(values)) != len(values):
        raise ValidationError(f'{name} contains duplicates: {values}')
    bad = [i for i in values if i < 1 or i > n]
    if bad:
        raise ValidationError(f'{name} has indices outside 1..{n}: {bad}')
    return np.array(sorted(values), dtype=np.int64) - 1


def validate_disjoint(first: np.ndarray, second: np.ndarray, names: str = 'A and B') -> None:
    common = np.intersect1d(first, second)
    if common.size:
        raise ValidationError(f'{names} must be disjoint, both contain {(common + 1).tolist()}')


def validate_probability_vector(q, name: str = 'probability vector') -> np.ndarray:
    arr = np.asarray(q, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f'{name} must be one-dimensional')
    if arr.size and (np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr))):
        raise ValidationError(f'{name} entries must lie in [0, 1]')
    return arr


def validate_positive(value: float, name: str) -> float:
    if value is None or not np.isfinite(value) or value <= 0:
        raise ValidationError(f'{name} must be positive, got {value}')
    return float(value)


def clamp_probability(value, band: float = 1e-9, what: str = 'probability') -> float:
    """Clamp rounding noise into [0, 1]; anything beyond the band is an error"""
    value = complex(value)
    if abs(value.imag) > band:
        raise NumericalConsistencyError(
            f'{what} has imaginary residue {value.imag:.3e}'
        )
    real = value.real
    if real < -band or real > 1.0 + band or np.isnan(real):
        raise NumericalConsistencyError(f'{what} = {real:.12g} lies outside [0, 1]')
    return min(max(real, 0.0), 1.0)


EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION_FAILED = 4


def exit_code_for(error: Exception) -> int:
    """Map a package exception to the CLI exit code"""
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(error, DPPError):
        return EXIT_USAGE
    return 1


def handle_errors(f):
    """Decorator turning package exceptions into CLI exit codes"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ValidationError as e:
            logger.error(f'Invalid input: {e}')
            raise click.UsageError(str(e))
        except DPPError as e:
            logger.error(f'{type(e).__name__}: {e}')
            click.echo(f'Error: {e}', err=True)
            raise click.exceptions.Exit(exit_code_for(e))
    return decorated_function
