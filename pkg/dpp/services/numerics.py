"""
Dense Hermitian linear algebra used by the samplers.

Real and complex matrices go through the same code: every transpose is a
conjugate transpose, and real inputs simply keep a float64 dtype.
"""
import logging
from typing import Tuple

import numpy as np
import scipy.linalg as la
from scipy.linalg.lapack import get_lapack_funcs

from dpp.config import settings
from dpp.models.kernel import KernelReport
from dpp.models.matrix import CholeskyFactor, EigenDecomposition
from dpp.utils.errors import (
    ConvergenceError, NumericalConsistencyError, NumericalError,
    SingularMatrixError, ValidationError
)
from dpp.utils.validators import (
    hermitian_defect, hermitize, is_hermitian, validate_hermitian, validate_square
)

logger = logging.getLogger(__name__)


def cholesky_factor(matrix, pivot_tol: float = None, scale: float = None,
                    check: bool = True) -> CholeskyFactor:
    """Cholesky factor of a Hermitian positive definite matrix.

    Raises SingularMatrixError carrying the 1-based row of the first pivot
    whose square falls below ``pivot_tol * scale``, where scale defaults to
    the largest diagonal magnitude of ``matrix``.
    """
    pivot_tol = settings.pivot_tol if pivot_tol is None else pivot_tol
    arr = validate_hermitian(matrix) if check else np.asarray(matrix)
    size = arr.shape[0]
    if size == 0:
        return CholeskyFactor.empty(arr.dtype)

    diag_scale = float(np.max(np.abs(np.diag(arr))))
    scale = max(diag_scale, scale or 0.0)
    if scale == 0.0:
        raise SingularMatrixError(1)

    lower, singular_at = _potrf(arr, pivot_tol, scale)
    if singular_at is not None:
        raise SingularMatrixError(singular_at)
    return CholeskyFactor(lower=lower, scale=scale)


def _potrf(arr: np.ndarray, pivot_tol: float, scale: float):
    """LAPACK potrf plus the relative pivot test; returns (lower, first bad row or None)"""
    potrf, = get_lapack_funcs(('potrf',), (arr,))
    lower, info = potrf(arr, lower=True, clean=True, overwrite_a=False)
    if info < 0:
        raise NumericalError(f'potrf rejected argument {-info}')

    # potrf computes the leading info-1 pivots before failing
    computed = arr.shape[0] if info == 0 else info - 1
    pivots = np.real(np.diag(lower))[:computed]
    bad = np.nonzero(~np.isfinite(pivots) | (pivots * pivots < pivot_tol * scale))[0]
    if bad.size:
        return lower, int(bad[0]) + 1
    if info > 0:
        return lower, int(info)
    return lower, None


def cholesky_prefix(matrix, pivot_tol: float = None, check: bool = True):
    """Factor the longest leading block that is numerically positive definite.

    Returns (factor of the leading block, 1-based index of the first singular
    pivot or None when the whole matrix factors).
    """
    pivot_tol = settings.pivot_tol if pivot_tol is None else pivot_tol
    arr = validate_hermitian(matrix) if check else np.asarray(matrix)
    if arr.shape[0] == 0:
        return CholeskyFactor.empty(arr.dtype), None
    scale = float(np.max(np.abs(np.diag(arr))))
    if scale == 0.0:
        return CholeskyFactor.empty(arr.dtype), 1

    lower, singular_at = _potrf(arr, pivot_tol, scale)
    if singular_at is None:
        return CholeskyFactor(lower=lower, scale=scale), None
    leading = singular_at - 1
    if leading == 0:
        return CholeskyFactor.empty(arr.dtype), singular_at
    # refactor the valid block; LAPACK leaves the failed trailing part undefined
    lower, _ = _potrf(arr[:leading, :leading], pivot_tol, scale)
    return CholeskyFactor(lower=lower, scale=scale), singular_at


def cholesky_rank(matrix, rtol: float, check: bool = True) -> int:
    """Numerical rank of a positive semidefinite matrix by pivoted Cholesky (LAPACK pstrf).

    Elimination stops at the first pivot at or below rtol times the largest diagonal entry.
    """
    arr = validate_hermitian(matrix) if check else np.asarray(matrix)
    if arr.shape[0] == 0:
        return 0
    top = float(np.max(np.real(np.diag(arr))))
    if top <= 0:
        return 0
    pstrf, = get_lapack_funcs(('pstrf',), (arr,))
    _, _, rank, info = pstrf(arr, tol=rtol * top, lower=True)
    if info < 0:
        raise NumericalError(f'pstrf rejected argument {-info}')
    return int(rank)


def solve_lower(factor: CholeskyFactor, rhs) -> np.ndarray:
    """Solve L X = rhs by forward substitution"""
    rhs = np.asarray(rhs)
    if rhs.shape[0] != factor.dim:
        raise ValidationError(
            f'right-hand side has {rhs.shape[0]} rows, factor has dimension {factor.dim}'
        )
    if factor.dim == 0:
        return np.zeros(rhs.shape, dtype=np.result_type(rhs, factor.lower))
    return la.solve_triangular(factor.lower, rhs, lower=True, check_finite=False)


def cholesky_append_block(factor: CholeskyFactor, block, corner,
                          pivot_tol: float = None, check: bool = True) -> CholeskyFactor:
    """Factor of [[A, B], [B*, C]] from the factor of A.

    Costs one triangular solve V = L_A^-1 B and one Cholesky of the Schur
    complement X = C - V* V; the result is [[L_A, 0], [V*, L_X]].
    """
    corner = validate_hermitian(corner, 'C') if check else np.asarray(corner)
    if factor.dim == 0:
        return cholesky_factor(corner, pivot_tol, scale=factor.scale, check=False)

    block = np.asarray(block)
    new = corner.shape[0]
    if block.shape != (factor.dim, new):
        raise ValidationError(
            f'block B has shape {block.shape}, expected {(factor.dim, new)}'
        )
    if new == 0:
        return factor

    v = solve_lower(factor, block)
    schur = hermitize(corner - v.conj().T @ v)
    scale = max(factor.scale, float(np.max(np.abs(np.diag(corner)))))
    try:
        tail = cholesky_factor(schur, pivot_tol, scale=scale, check=False)
    except SingularMatrixError as e:
        raise e.shifted(factor.dim) from e

    size = factor.dim + new
    lower = np.zeros((size, size), dtype=np.result_type(factor.lower, v, tail.lower))
    lower[:factor.dim, :factor.dim] = factor.lower
    lower[factor.dim:, :factor.dim] = v.conj().T
    lower[factor.dim:, factor.dim:] = tail.lower
    return CholeskyFactor(lower=lower, scale=scale)


def herm_eigendecomposition(matrix, driver: str = None, check: bool = True) -> EigenDecomposition:
    """Orthonormal eigendecomposition of a Hermitian matrix (ascending eigenvalues).

    LAPACK reduces to tridiagonal form first; ``driver='ev'`` then runs the
    implicit QR iteration, the default ``'evd'`` divide and conquer.
    """
    arr = validate_hermitian(matrix) if check else np.asarray(matrix)
    if arr.shape[0] == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0), dtype=arr.dtype))
    try:
        eigenvalues, eigenvectors = la.eigh(arr, driver=driver or settings.eigh_driver)
    except la.LinAlgError as e:
        logger.error(f'Eigendecomposition failed: {e}')
        raise ConvergenceError(f'eigendecomposition did not converge: {e}') from e
    return EigenDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def herm_eigenvalues(matrix, check: bool = True) -> np.ndarray:
    """Ascending eigenvalues only"""
    arr = validate_hermitian(matrix) if check else np.asarray(matrix)
    if arr.shape[0] == 0:
        return np.zeros(0)
    try:
        return la.eigvalsh(arr, driver=settings.eigh_driver)
    except la.LinAlgError as e:
        logger.error(f'Eigenvalue computation failed: {e}')
        raise ConvergenceError(f'eigenvalue computation did not converge: {e}') from e


def log_determinant(matrix) -> Tuple[complex, float]:
    """(phase, log|det|) of a square matrix"""
    arr = validate_square(matrix)
    if arr.shape[0] == 0:
        return 1.0, 0.0
    sign, logabs = np.linalg.slogdet(arr)
    return sign, float(logabs)


def hermitian_determinant(matrix) -> float:
    """det of a Hermitian matrix as a real double (underflows past |log det| > 700)"""
    phase, logabs = log_determinant(matrix)
    if abs(np.imag(phase)) > 1e-9:
        raise NumericalConsistencyError(f'determinant has complex phase {phase}')
    if phase == 0:
        return 0.0
    return float(np.real(phase)) * float(np.exp(logabs))


def validate_kernel(matrix, tol: float = None, eigen_max_n: int = None) -> KernelReport:
    """Check that K is Hermitian with spectrum in [-tol, 1 + tol].

    Small kernels are checked through their eigenvalues, large ones through
    factorizations of K + tol I and (1 + tol) I - K.
    """
    tol = settings.kernel_tol if tol is None else tol
    eigen_max_n = settings.eigen_check_max_n if eigen_max_n is None else eigen_max_n
    arr = validate_square(matrix, 'kernel')
    report = KernelReport()

    if not is_hermitian(arr):
        report.violations.append(f'not Hermitian (defect {hermitian_defect(arr):.3e})')
        return report

    size = arr.shape[0]
    if size <= eigen_max_n:
        eigenvalues = la.eigvalsh(arr) if size else np.zeros(0)
        if size:
            report.min_eigenvalue = float(eigenvalues[0])
            report.max_eigenvalue = float(eigenvalues[-1])
            if eigenvalues[0] < -tol:
                report.violations.append(f'eigenvalue {eigenvalues[0]:.6g} < 0')
            if eigenvalues[-1] > 1.0 + tol:
                report.violations.append(f'eigenvalue {eigenvalues[-1]:.6g} > 1')
        return report

    report.method = 'factorization'
    identity = np.eye(size)
    try:
        cholesky_factor(arr + tol * identity, check=False)
    except SingularMatrixError as e:
        report.violations.append(f'eigenvalue < 0 (K + tol I singular at index {e.index})')
    try:
        cholesky_factor((1.0 + tol) * identity - arr, check=False)
    except SingularMatrixError as e:
        report.violations.append(f'eigenvalue > 1 ((1 + tol) I - K singular at index {e.index})')
    return report
