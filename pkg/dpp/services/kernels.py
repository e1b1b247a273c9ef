"""
Kernel construction, K <-> L conversion and expected-cardinality calibration.
"""
import logging
import math
from typing import Union

import numpy as np
import scipy.linalg as la
from scipy.spatial.distance import cdist

from dpp.models.image import PatchSet
from dpp.models.kernel import CalibrationResult, KernelMatrix, LEnsemble
from dpp.services.numerics import cholesky_factor, cholesky_rank, herm_eigenvalues
from dpp.utils.errors import (
    NoLEnsembleError, NumericalConsistencyError, SingularMatrixError,
    UnreachableTargetError, ValidationError
)
from dpp.utils.rng import make_rng
from dpp.utils.validators import hermitize, validate_hermitian, validate_positive

logger = logging.getLogger(__name__)

CALIBRATION_TOL = 1e-8
CALIBRATION_MAX_ITER = 200
RANK_RTOL = 1e-10


def kernel_array(kernel: Union[KernelMatrix, np.ndarray]) -> np.ndarray:
    """Matrix of a KernelMatrix, or a validated raw array"""
    if isinstance(kernel, KernelMatrix):
        return kernel.matrix
    return validate_hermitian(kernel, 'kernel')


def ensemble_array(ensemble: Union[LEnsemble, np.ndarray]) -> np.ndarray:
    if isinstance(ensemble, LEnsemble):
        return ensemble.matrix
    return validate_hermitian(ensemble, 'L')


def k_from_l(ensemble: Union[LEnsemble, np.ndarray]) -> KernelMatrix:
    """K = L (I + L)^-1, by solving (I + L) X = L through a Cholesky factor"""
    matrix = ensemble_array(ensemble)
    size = matrix.shape[0]
    factor = cholesky_factor(np.eye(size) + matrix, check=False)
    kernel = hermitize(la.cho_solve((factor.lower, True), matrix, check_finite=False))
    provenance = dict(ensemble.provenance) if isinstance(ensemble, LEnsemble) else {'tag': 'file'}
    return KernelMatrix(matrix=kernel, provenance=provenance)


def l_from_k(kernel: Union[KernelMatrix, np.ndarray]) -> LEnsemble:
    """L = K (I - K)^-1; fails when K has an eigenvalue at 1"""
    matrix = kernel_array(kernel)
    size = matrix.shape[0]
    try:
        factor = cholesky_factor(np.eye(size) - matrix, check=False)
    except SingularMatrixError as e:
        raise NoLEnsembleError(
            f'I - K is singular at index {e.index}; projection-like kernels have no L-ensemble'
        ) from e
    ensemble = hermitize(la.cho_solve((factor.lower, True), matrix, check_finite=False))
    provenance = dict(kernel.provenance) if isinstance(kernel, KernelMatrix) else {'tag': 'file'}
    return LEnsemble(matrix=ensemble, provenance=provenance)


def _check_size(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValidationError(f'ground set size must be at least 1, got {n}')
    return n


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Q factor of a standard Gaussian matrix, signs fixed so Q is Haar distributed"""
    gaussian = rng.standard_normal((n, n))
    q, r = la.qr(gaussian)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def build_random(n: int, seed: int) -> KernelMatrix:
    """K = Q D Q* with D ~ U(0, 1) and Q a seeded random orthogonal matrix"""
    n = _check_size(n)
    rng = make_rng(seed)
    q = random_unitary(n, rng)
    # uniform on the open interval (0, 1)
    d = 1.0 - rng.random(n)
    d[d >= 1.0] = np.nextafter(1.0, 0.0)
    kernel = hermitize((q * d) @ q.conj().T)
    return KernelMatrix(matrix=kernel, provenance={'tag': 'random', 'n': n, 'seed': int(seed)})


def ginibre_points(n: int) -> np.ndarray:
    """First n points, row-major, of the centred integer grid of side ceil(sqrt(n))"""
    n = _check_size(n)
    side = math.isqrt(n)
    if side * side < n:
        side += 1
    coords = np.arange(side) - (side - 1) // 2
    real, imag = np.meshgrid(coords, coords)
    return (real + 1j * imag).ravel()[:n]


def build_ginibre(n: int, seed: int = None) -> LEnsemble:
    """Discrete Ginibre-like L(x1, x2) = exp(-(|x1|^2 + |x2|^2)/2 + x1 conj(x2)) / pi.

    The grid is deterministic; `seed` is only recorded.
    """
    points = ginibre_points(n)
    sq = np.abs(points) ** 2
    exponent = -0.5 * (sq[:, None] + sq[None, :]) + np.outer(points, points.conj())
    ensemble = hermitize(np.exp(exponent) / math.pi)
    provenance = {'tag': 'ginibre', 'n': int(n)}
    if seed is not None:
        provenance['seed'] = int(seed)
    return LEnsemble(matrix=ensemble, provenance=provenance)


def build_patch_gaussian(patches, bandwidth: float) -> LEnsemble:
    """L(i, j) = exp(-|P_i - P_j|^2 / s^2) over patch vectors"""
    s = validate_positive(bandwidth, 'bandwidth s')
    vectors = patches.vectors if isinstance(patches, PatchSet) else np.asarray(patches, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] < 1:
        raise ValidationError('patches must be a non-empty list of equal-length vectors')
    squared = cdist(vectors, vectors, 'sqeuclidean')
    ensemble = hermitize(np.exp(-squared / (s * s)))
    np.fill_diagonal(ensemble, 1.0)
    return LEnsemble(
        matrix=ensemble,
        provenance={'tag': 'patch', 'n': int(vectors.shape[0]), 'bandwidth': s},
    )


def projection_from_basis(basis: np.ndarray, rank: int) -> np.ndarray:
    """Orthogonal projector onto the first `rank` columns of a unitary basis"""
    columns = basis[:, :rank]
    return hermitize(columns @ columns.conj().T)


def build_projection(n: int, rank: int, seed: int) -> KernelMatrix:
    """Projection kernel with exactly `rank` unit eigenvalues"""
    n = _check_size(n)
    rank = int(rank)
    if rank < 1 or rank > n:
        raise ValidationError(f'rank must satisfy 1 <= rank <= n, got rank={rank}, n={n}')
    q = random_unitary(n, make_rng(seed))
    return KernelMatrix(
        matrix=projection_from_basis(q, rank),
        provenance={'tag': 'projection', 'n': n, 'rank': rank, 'seed': int(seed)},
    )


def expected_cardinality(kernel: Union[KernelMatrix, np.ndarray]) -> float:
    """E|Y| = tr(K)"""
    trace = complex(np.trace(kernel_array(kernel)))
    if abs(trace.imag) > 1e-10 * max(1.0, abs(trace.real)):
        raise NumericalConsistencyError(f'trace of K has imaginary part {trace.imag:.3e}')
    return trace.real


def numerical_rank(eigenvalues) -> int:
    """Number of eigenvalues above RANK_RTOL times the largest"""
    mu = np.clip(np.asarray(eigenvalues, dtype=np.float64), 0.0, None)
    top = float(mu.max()) if mu.size else 0.0
    return int(np.sum(mu > RANK_RTOL * top)) if top > 0 else 0


def _spectral_cardinality(eigenvalues: np.ndarray):
    def cardinality(alpha: float) -> float:
        scaled = alpha * eigenvalues
        return float(np.sum(scaled / (1.0 + scaled)))
    return cardinality


def _trace_cardinality(matrix: np.ndarray, target: float):
    def cardinality(alpha: float) -> float:
        try:
            return expected_cardinality(k_from_l(alpha * matrix))
        except SingularMatrixError as e:
            # I + alpha L fails the pivot test once alpha swamps the null space of L
            raise UnreachableTargetError(
                f'target {target} not reached before I + {alpha:.3g} L lost rank at index {e.index}'
            ) from e
    return cardinality


def calibrate_alpha(ensemble: Union[LEnsemble, np.ndarray], target: float,
                    method: str = 'eigen', eigenvalues: np.ndarray = None,
                    tol: float = CALIBRATION_TOL,
                    max_iter: int = CALIBRATION_MAX_ITER) -> CalibrationResult:
    """Find alpha with sum(alpha mu / (1 + alpha mu)) = target by bisection.

    The bracket doubles from [0, 1] until it holds the target. `method='eigen'`
    evaluates the sum from the spectrum of L (computed once, or passed in);
    `method='trace'` evaluates tr(alpha L (I + alpha L)^-1) without eigenvalues.
    """
    matrix = ensemble_array(ensemble)
    target = float(target)
    if not np.isfinite(target) or target <= 0:
        raise ValidationError(f'target expected cardinality must be positive, got {target}')

    if method == 'eigen':
        if eigenvalues is None:
            eigenvalues = herm_eigenvalues(matrix, check=False)
        mu = np.clip(np.asarray(eigenvalues, dtype=np.float64), 0.0, None)
        rank = numerical_rank(mu)
        if target >= rank:
            raise UnreachableTargetError(
                f'target {target} is not below the rank {rank} of L'
            )
        cardinality = _spectral_cardinality(mu)
    elif method == 'trace':
        rank = cholesky_rank(matrix, RANK_RTOL, check=False)
        if target >= rank:
            raise UnreachableTargetError(
                f'target {target} is not below the rank {rank} of L'
            )
        cardinality = _trace_cardinality(matrix, target)
    else:
        raise ValidationError(f'unknown calibration method {method!r}')

    tolerance = tol * max(1.0, target)
    iterations = 0
    low, high = 0.0, 1.0
    value = cardinality(high)
    while value < target - tolerance:
        low, high = high, 2.0 * high
        iterations += 1
        if high > 1e300:
            raise UnreachableTargetError(f'target {target} not reached by any alpha')
        value = cardinality(high)

    alpha = high
    steps = 0
    while abs(value - target) > tolerance and steps < max_iter:
        steps += 1
        alpha = 0.5 * (low + high)
        value = cardinality(alpha)
        if value < target:
            low = alpha
        else:
            high = alpha
    iterations += steps
    if abs(value - target) > tolerance:
        logger.warning(f'Calibration stopped after {max_iter} iterations, '
                       f'|E|Y| - target| = {abs(value - target):.3e}')

    logger.info(f'Calibrated alpha={alpha:.6g} for E|Y|={target} in {iterations} iterations')
    return CalibrationResult(alpha=alpha, achieved_expected_cardinality=value,
                             iterations=iterations, target=target)


def calibrated_kernel(ensemble: LEnsemble, target: float, **kwargs):
    """(K_alpha, calibration) with K_alpha = alpha L (I + alpha L)^-1"""
    if not isinstance(ensemble, LEnsemble):
        ensemble = LEnsemble(matrix=ensemble_array(ensemble), provenance={'tag': 'file'})
    calibration = calibrate_alpha(ensemble, target, **kwargs)
    kernel = k_from_l(ensemble.scaled(calibration.alpha))
    kernel.provenance['expected_card'] = target
    return kernel, calibration
