"""
Exact DPP probabilities and the three exact samplers.

Index sets in the public functions are 1-based, like SampleSet. The samplers
share one RNG contract: a sampler call builds its own generator from `seed`
and consumes uniforms in a fixed order, so a (kernel, seed) pair always gives
the same draw.
"""
import logging
import math
from typing import Iterable, Optional, Union

import numpy as np

from dpp.config import settings
from dpp.models.kernel import KernelMatrix
from dpp.models.matrix import CholeskyFactor, EigenDecomposition
from dpp.models.sample import BernoulliEnvelope, SampleSet, ThinningState
from dpp.services.kernels import expected_cardinality, kernel_array
from dpp.services.numerics import (
    cholesky_append_block, cholesky_factor, cholesky_prefix,
    herm_eigendecomposition, hermitian_determinant, solve_lower
)
from dpp.utils.errors import (
    EnvelopeViolationError, NumericalConsistencyError, NumericalDegeneracyError,
    SingularMatrixError, UndefinedConditionalError, ValidationError
)
from dpp.utils.rng import make_rng
from dpp.utils.timing import NULL_TIMER
from dpp.utils.validators import (
    clamp_probability, hermitize, validate_disjoint, validate_index_set,
    validate_probability_vector
)

logger = logging.getLogger(__name__)

KernelLike = Union[KernelMatrix, np.ndarray]

ORDERS = ('natural', 'ascending-diagonal')
SPECTRAL_SUM_TOL = 1e-6
DEGENERACY_NORM = 1e-12


def dpp_probability(kernel: KernelLike, subset: Iterable[int]) -> float:
    """P(Y = A) = (-1)^|A| det(I^{complement of A} - K)"""
    matrix = kernel_array(kernel)
    n = matrix.shape[0]
    members = validate_index_set(subset, n, 'A')
    shifted = -matrix.copy()
    outside = np.ones(n, dtype=bool)
    outside[members] = False
    shifted[outside, outside] += 1.0
    value = (-1.0) ** members.size * hermitian_determinant(shifted)
    return clamp_probability(value, settings.prob_band, 'P(Y = A)')


def _excluded_factor(matrix: np.ndarray, excluded: np.ndarray) -> CholeskyFactor:
    """Cholesky factor of (I - K)_B"""
    block = np.eye(excluded.size) - matrix[np.ix_(excluded, excluded)]
    return cholesky_factor(block, check=False)


def _conditioned_block(matrix: np.ndarray, excluded: np.ndarray, factor_b: CholeskyFactor,
                       columns: np.ndarray) -> np.ndarray:
    """H^B restricted to `columns`: K_C + J* J with J = L_B^-1 K_{B x C}"""
    block = matrix[np.ix_(columns, columns)]
    if excluded.size:
        j = solve_lower(factor_b, matrix[np.ix_(excluded, columns)])
        block = block + j.conj().T @ j
    return hermitize(block)


def marginal(kernel: KernelLike, included: Iterable[int] = (), excluded: Iterable[int] = ()) -> float:
    """P(A in Y, B disjoint from Y) = det((I - K)_B) det(H^B_A)"""
    matrix = kernel_array(kernel)
    n = matrix.shape[0]
    a = validate_index_set(included, n, 'A')
    b = validate_index_set(excluded, n, 'B')
    validate_disjoint(a, b)

    try:
        factor_b = _excluded_factor(matrix, b)
    except SingularMatrixError:
        return 0.0
    value = factor_b.determinant()
    if a.size:
        value *= hermitian_determinant(_conditioned_block(matrix, b, factor_b, a))
    return clamp_probability(value, settings.prob_band, 'marginal probability')


def _raw_conditional(matrix: np.ndarray, state: ThinningState, k: int):
    """Unclamped P(k in Y | A in Y, B out of Y) for the sets held in `state`.

    Returns (p, H^B_{A+k}); refreshes ``state.h_factor`` when B has changed
    since it was built.
    """
    a = np.asarray(state.accepted, dtype=np.int64)
    b = np.asarray(state.excluded, dtype=np.int64)
    columns = np.append(a, k)
    h = _conditioned_block(matrix, b, state.factor_b, columns)
    if a.size == 0:
        return float(np.real(h[0, 0])), h

    if state.h_factor is None or state.h_factor_b_size != b.size:
        try:
            state.h_factor = cholesky_factor(h[:-1, :-1], check=False)
        except SingularMatrixError as e:
            raise UndefinedConditionalError(
                'conditioning event has zero probability (H^B_A singular)'
            ) from e
        state.h_factor_b_size = b.size
    w = solve_lower(state.h_factor, h[:-1, -1])
    return float(np.real(h[-1, -1]) - np.real(np.vdot(w, w))), h


def _accept(state: ThinningState, k: int, h: np.ndarray) -> None:
    """Move k into A, growing the factor of H^B_A by one row when B is unchanged"""
    b_size = len(state.excluded)
    if state.accepted and state.h_factor is not None and state.h_factor_b_size == b_size:
        try:
            state.h_factor = cholesky_append_block(state.h_factor, h[:-1, -1:], h[-1:, -1:], check=False)
        except SingularMatrixError:
            state.h_factor = None
    elif not state.accepted:
        try:
            state.h_factor = cholesky_factor(h, check=False)
        except SingularMatrixError:
            state.h_factor = None
    else:
        state.h_factor = None
    state.h_factor_b_size = b_size
    state.accepted.append(k)


def _exclude(matrix: np.ndarray, state: ThinningState, new: list) -> None:
    """Push `new` into B with one block append to the factor of (I - K)_B"""
    new = np.asarray(new, dtype=np.int64)
    b = np.asarray(state.excluded, dtype=np.int64)
    block = -matrix[np.ix_(b, new)]
    corner = np.eye(new.size) - matrix[np.ix_(new, new)]
    state.factor_b = cholesky_append_block(state.factor_b, block, corner, check=False)
    state.excluded.extend(int(i) for i in new)


def conditional_inclusion(kernel: KernelLike, included: Iterable[int], excluded: Iterable[int],
                          k: int) -> float:
    """P(k in Y | A in Y, B disjoint from Y), computed from H^B without inverses"""
    matrix = kernel_array(kernel)
    n = matrix.shape[0]
    a = validate_index_set(included, n, 'A')
    b = validate_index_set(excluded, n, 'B')
    validate_disjoint(a, b)
    position = int(validate_index_set([k], n, 'k')[0])
    if position in a or position in b:
        raise ValidationError(f'k={k} must lie outside A and B')

    try:
        factor_b = _excluded_factor(matrix, b)
    except SingularMatrixError as e:
        raise UndefinedConditionalError('P(B out of Y) = 0') from e
    state = ThinningState(accepted=a.tolist(), excluded=b.tolist(), factor_b=factor_b)
    p, _ = _raw_conditional(matrix, state, position)
    return clamp_probability(p, settings.prob_band, f'P({k} in Y | A, B)')


def _permuted(matrix: np.ndarray, order: Optional[np.ndarray]) -> np.ndarray:
    if order is None:
        return matrix
    return matrix[np.ix_(order, order)]


def bernoulli_envelope(kernel: KernelLike, order: str = 'natural') -> BernoulliEnvelope:
    """Dominating Bernoulli probabilities q for sequential thinning.

    q_k = K(k,k) + |L_{k-1}^-1 K_{1..k-1, k}|^2 where L is the Cholesky factor
    of I - K, computed once. From the first singular pivot j of I - K on,
    q is forced to 1.
    """
    matrix = kernel_array(kernel)
    n = matrix.shape[0]
    if order not in ORDERS:
        raise ValidationError(f'order must be one of {ORDERS}, got {order!r}')
    permutation = None
    if order == 'ascending-diagonal':
        permutation = np.argsort(np.real(np.diag(matrix)), kind='stable')
        matrix = _permuted(matrix, permutation)

    q = np.real(np.diag(matrix)).astype(np.float64)
    prefix, degenerate_from = cholesky_prefix(np.eye(n) - matrix, check=False)

    if prefix.dim > 1:
        # below the diagonal, row k of the factor is -(L_{1..k-1}^-1 K_{1..k-1, k})*
        q[:prefix.dim] += np.sum(np.abs(np.tril(prefix.lower, -1)) ** 2, axis=1)

    if degenerate_from is not None:
        q[degenerate_from - 1:] = 1.0
        logger.warning(f'Envelope is degenerate from index {degenerate_from} of {n}')
    q = np.clip(q, 0.0, 1.0)
    return BernoulliEnvelope(q=q, degenerate_from=degenerate_from, order=permutation)


def envelope_bound(kernel: KernelLike) -> float:
    """(1 + lmax / (2 (1 - lmax))) E|Y|, an upper bound on E|X|; inf when lmax = 1"""
    matrix = kernel_array(kernel)
    lmax = float(herm_eigendecomposition(matrix, check=False).eigenvalues[-1])
    if lmax >= 1.0 - 1e-12:
        return math.inf
    lmax = max(lmax, 0.0)
    return (1.0 + lmax / (2.0 * (1.0 - lmax))) * expected_cardinality(matrix)


def _bernoulli_positions(q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return np.nonzero(rng.random(q.shape[0]) < q)[0]


def sample_bernoulli(q, seed: int) -> SampleSet:
    """Independent coins with probabilities q"""
    q = validate_probability_vector(q, 'q')
    return SampleSet.from_positions(_bernoulli_positions(q, make_rng(seed)), seed, 'bernoulli')


def _spectral_draw(vectors: np.ndarray, rng: np.random.Generator) -> list:
    """Sequential draws from the projection DPP spanned by the rows of `vectors`"""
    n, m = vectors.shape
    residual = np.sum(np.abs(vectors) ** 2, axis=1)
    basis = []
    chosen = []
    for step in range(m):
        probabilities = residual / (m - step)
        total = float(np.sum(probabilities))
        if abs(total - 1.0) > SPECTRAL_SUM_TOL:
            raise NumericalConsistencyError(
                f'spectral step distribution sums to {total:.9g} at draw {step + 1}'
            )
        probabilities = np.clip(probabilities, 0.0, None)
        cumulative = np.cumsum(probabilities / np.sum(probabilities))
        k = min(int(np.searchsorted(cumulative, rng.random(), side='right')), n - 1)

        w = vectors[k].copy()
        for e in basis:
            w -= np.vdot(e, w) * e
        norm = float(np.linalg.norm(w))
        if norm < DEGENERACY_NORM:
            raise NumericalDegeneracyError(
                f'Gram-Schmidt vector for index {k + 1} has norm {norm:.3e}'
            )
        e = w / norm
        basis.append(e)
        residual = residual - np.abs(vectors @ e.conj()) ** 2
        residual[k] = 0.0
        chosen.append(k)
    return chosen


def sample_spectral(kernel: KernelLike, seed: int, eig: EigenDecomposition = None,
                    timer=NULL_TIMER) -> SampleSet:
    """Spectral sampler: eigendecomposition, Bernoulli(lambda_j) frequency
    selection, then sequential draws with Gram-Schmidt updates.

    A stored `eig` of the same kernel skips the first step.
    """
    matrix = kernel_array(kernel)
    n = matrix.shape[0]
    rng = make_rng(seed)

    with timer.step('eigendecomposition'):
        if eig is None:
            eig = herm_eigendecomposition(matrix, check=False)
        elif eig.dim != n:
            raise ValidationError(f'eigendecomposition has dimension {eig.dim}, kernel {n}')

    with timer.step('frequency_selection'):
        eigenvalues = np.clip(eig.eigenvalues, 0.0, 1.0)
        active = rng.random(n) < eigenvalues
        vectors = eig.eigenvectors[:, active]

    with timer.step('sequential_draw'):
        chosen = _spectral_draw(vectors, rng)

    return SampleSet.from_positions(chosen, seed, 'spectral')


def sample_sequential(kernel: KernelLike, seed: int, timer=NULL_TIMER) -> SampleSet:
    """Visit 1..N in order and include k with P(k in Y | A in Y, B out of Y)"""
    matrix = kernel_array(kernel)
    n = matrix.shape[0]
    rng = make_rng(seed)
    state = ThinningState(factor_b=CholeskyFactor.empty(matrix.dtype))

    with timer.step('sequential_sampling'):
        for k in range(n):
            p, h = _raw_conditional(matrix, state, k)
            p = clamp_probability(p, settings.prob_band, f'p_{k + 1}')
            if rng.random() < p:
                _accept(state, k, h)
            else:
                _exclude(matrix, state, [k])

    return SampleSet.from_positions(state.accepted, seed, 'sequential')


def _thin(matrix: np.ndarray, q: np.ndarray, candidates: np.ndarray,
          rng: np.random.Generator) -> list:
    """Visit the points of X in order and keep k_j with probability p/q"""
    band = settings.prob_band
    state = ThinningState(factor_b=CholeskyFactor.empty(matrix.dtype))
    pending = []
    previous = -1
    for k in candidates:
        k = int(k)
        pending.extend(range(previous + 1, k))
        if pending:
            _exclude(matrix, state, pending)
            pending = []

        p, h = _raw_conditional(matrix, state, k)
        p = clamp_probability(p, settings.prob_band, f'p_{k + 1}')
        if p > q[k] + band:
            raise EnvelopeViolationError(f'p_{k + 1} = {p:.12g} exceeds q_{k + 1} = {q[k]:.12g}')
        if rng.random() < min(p / q[k], 1.0):
            _accept(state, k, h)
        else:
            pending = [k]
        previous = k
    return state.accepted


def sample_thinning(kernel: KernelLike, envelope: BernoulliEnvelope = None, seed: int = 0,
                    timer=NULL_TIMER) -> SampleSet:
    """Sequential thinning: draw X ~ Bernoulli(q), then run the sequential
    sampler on the points of X only, accepting k_j with probability p/q.

    Skipped indices join B through one Cholesky block append per visited
    point. With a degenerate envelope every tail index is visited.
    """
    matrix = kernel_array(kernel)
    n = matrix.shape[0]

    with timer.step('envelope_preprocess'):
        if envelope is None:
            envelope = bernoulli_envelope(matrix)
        elif envelope.n != n:
            raise ValidationError(f'envelope has {envelope.n} entries, kernel {n}')

    rng = make_rng(seed)
    with timer.step('bernoulli_draw'):
        candidates = _bernoulli_positions(envelope.q, rng)

    with timer.step('sequential_thinning'):
        work = _permuted(matrix, envelope.order)
        accepted = _thin(work, envelope.q, candidates, rng)
        if envelope.order is not None:
            accepted = envelope.order[np.asarray(accepted, dtype=np.int64)]

    logger.debug(f'Thinning kept {len(accepted)} of {candidates.size} candidates')
    return SampleSet.from_positions(accepted, seed, 'thinning')


SAMPLERS = {
    'spectral': sample_spectral,
    'sequential': sample_sequential,
    'thinning': sample_thinning,
}


def draw(algo: str, kernel: KernelLike, seed: int, timer=NULL_TIMER, envelope=None, eig=None) -> SampleSet:
    """Dispatch to one of the three samplers by name"""
    if algo == 'spectral':
        return sample_spectral(kernel, seed, eig=eig, timer=timer)
    if algo == 'sequential':
        return sample_sequential(kernel, seed, timer=timer)
    if algo == 'thinning':
        return sample_thinning(kernel, envelope, seed, timer=timer)
    raise ValidationError(f'unknown algorithm {algo!r}; expected one of {sorted(SAMPLERS)}')
