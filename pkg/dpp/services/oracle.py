"""
Brute-force reference distributions for small ground sets.

Subsets are encoded as bitmasks: bit i set means element i + 1 is present.
Enumeration is exponential in n and refuses n above settings.oracle_max_n.
"""
import logging
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from dpp.config import settings
from dpp.models.distribution import ChiSquareResult, SubsetDistribution
from dpp.models.sample import SampleSet
from dpp.services.kernels import kernel_array
from dpp.utils.errors import CapacityError, NumericalConsistencyError, ValidationError

logger = logging.getLogger(__name__)

CHUNK_SIZE = 4096
MIN_EXPECTED_COUNT = 5.0
NORMALIZATION_TOL = 1e-8
DIRECTIONS = ('superset', 'subset')


def subset_to_mask(subset: Iterable[int]) -> int:
    """Bitmask of a 1-based index set"""
    mask = 0
    for index in subset:
        if index < 1:
            raise ValidationError(f'indices are 1-based, got {index}')
        mask |= 1 << (int(index) - 1)
    return mask


def mask_to_subset(mask: int) -> tuple:
    """1-based indices of the bits set in `mask`"""
    subset = []
    position = 0
    while mask:
        if mask & 1:
            subset.append(position + 1)
        mask >>= 1
        position += 1
    return tuple(subset)


def _check_capacity(n: int) -> None:
    if n > settings.oracle_max_n:
        raise CapacityError(
            f'enumeration over 2^{n} subsets exceeds the cap n <= {settings.oracle_max_n}'
        )


def _membership(n: int, masks: np.ndarray) -> np.ndarray:
    """Boolean (len(masks), n) table of element membership"""
    return ((masks[:, None] >> np.arange(n)) & 1).astype(bool)


def enumerate_distribution(kernel) -> SubsetDistribution:
    """Exact P(Y = A) for all 2^n subsets through batched determinants"""
    matrix = kernel_array(kernel)
    n = matrix.shape[0]
    _check_capacity(n)
    total = 1 << n
    probabilities = np.empty(total)
    identity = np.eye(n)

    for start in range(0, total, CHUNK_SIZE):
        masks = np.arange(start, min(start + CHUNK_SIZE, total), dtype=np.int64)
        members = _membership(n, masks)
        # I restricted to the complement of A, minus K
        batch = np.broadcast_to(-matrix, (masks.size, n, n)).copy()
        outside = (~members).astype(matrix.real.dtype)
        batch += identity * outside[:, None, :]
        if n:
            sign, logabs = np.linalg.slogdet(batch)
            values = sign * np.exp(logabs)
        else:
            values = np.ones(masks.size, dtype=matrix.dtype)
        values = values * (-1.0) ** np.sum(members, axis=1)
        if np.any(np.abs(np.imag(values)) > settings.prob_band):
            raise NumericalConsistencyError('subset probability has an imaginary residue')
        probabilities[start:start + masks.size] = np.real(values)

    band = settings.prob_band
    if np.any(probabilities < -band) or np.any(probabilities > 1.0 + band):
        raise NumericalConsistencyError('subset probability outside [0, 1]')
    mass = float(probabilities.sum())
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        raise NumericalConsistencyError(f'subset probabilities sum to {mass:.12f}, not 1')
    probabilities = np.clip(probabilities, 0.0, 1.0)
    logger.debug(f'Enumerated {total} subsets, total mass {probabilities.sum():.12f}')
    return SubsetDistribution(n=n, probabilities=probabilities)


def _butterfly(values: np.ndarray, n: int, sign: float, direction: str) -> np.ndarray:
    """One pass per element over the bitmask-indexed table"""
    if direction not in DIRECTIONS:
        raise ValidationError(f'direction must be one of {DIRECTIONS}, got {direction!r}')
    out = np.array(values, dtype=np.result_type(values, np.float64), copy=True)
    for i in range(n):
        # axis 1 is bit i: index 0 without element i + 1, index 1 with it
        view = out.reshape(1 << (n - 1 - i), 2, 1 << i)
        if direction == 'superset':
            view[:, 0, :] += sign * view[:, 1, :]
        else:
            view[:, 1, :] += sign * view[:, 0, :]
    return out


def _table_size(values: np.ndarray, n: int = None) -> int:
    size = values.shape[0]
    if n is None:
        n = size.bit_length() - 1
    if size != 1 << n:
        raise ValidationError(f'table has {size} entries, expected 2^{n}')
    _check_capacity(n)
    return n


def zeta_transform(f: Sequence[float], n: int = None, direction: str = 'superset') -> np.ndarray:
    """g(A) = sum of f(B) over B containing A (superset) or contained in A (subset)"""
    values = np.asarray(f)
    n = _table_size(values, n)
    return _butterfly(values, n, 1.0, direction)


def mobius_invert(g: Sequence[float], n: int = None, direction: str = 'superset') -> np.ndarray:
    """Inverse of zeta_transform: recovers f from its superset (or subset) sums"""
    values = np.asarray(g)
    n = _table_size(values, n)
    return _butterfly(values, n, -1.0, direction)


def inclusion_probabilities(kernel) -> np.ndarray:
    """det(K_A) for every bitmask A; the superset sums of the pmf"""
    matrix = kernel_array(kernel)
    n = matrix.shape[0]
    _check_capacity(n)
    total = 1 << n
    values = np.empty(total)
    values[0] = 1.0
    for mask in range(1, total):
        positions = np.array(mask_to_subset(mask), dtype=np.int64) - 1
        values[mask] = np.real(np.linalg.det(matrix[np.ix_(positions, positions)]))
    return values


def observed_counts(draws: Iterable[SampleSet], n: int) -> np.ndarray:
    """Histogram of draws over the 2^n subsets"""
    _check_capacity(n)
    counts = np.zeros(1 << n, dtype=np.int64)
    for draw in draws:
        if draw.indices and draw.indices[-1] > n:
            raise ValidationError(f'draw {draw.indices} does not fit a ground set of size {n}')
        counts[subset_to_mask(draw.indices)] += 1
    return counts


def empirical_distribution(draws: Iterable[SampleSet], n: int) -> SubsetDistribution:
    counts = observed_counts(draws, n)
    total = int(counts.sum())
    if total == 0:
        raise ValidationError('no draws to build an empirical distribution from')
    return SubsetDistribution(n=n, probabilities=counts / total)


def total_variation(p, q) -> float:
    """Half the L1 distance between two distributions over the same subsets"""
    p = p.probabilities if isinstance(p, SubsetDistribution) else np.asarray(p, dtype=float)
    q = q.probabilities if isinstance(q, SubsetDistribution) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValidationError(f'distributions differ in size: {p.shape} vs {q.shape}')
    return 0.5 * float(np.sum(np.abs(p - q)))


def chi_square_stat(observed, expected, total: int = None) -> ChiSquareResult:
    """Pearson chi-square goodness of fit.

    `expected` holds probabilities. Cells with expected count below 5 are
    pooled (in ascending order of expected count) until each pooled cell
    reaches 5.
    """
    observed = np.asarray(observed, dtype=float)
    expected = expected.probabilities if isinstance(expected, SubsetDistribution) else expected
    expected = np.asarray(expected, dtype=float)
    if observed.shape != expected.shape:
        raise ValidationError(f'observed {observed.shape} and expected {expected.shape} differ')
    total = int(observed.sum()) if total is None else total
    if total <= 0:
        raise ValidationError('chi-square test needs at least one observation')

    counts = expected * total
    support = counts > 0
    if np.any(observed[~support] > 0):
        # observations where the model puts no mass
        df = max(int(support.sum()) - 1, 1)
        return ChiSquareResult(statistic=float('inf'), df=df, p_value=0.0, pooled_cells=0)

    big = counts >= MIN_EXPECTED_COUNT
    cells_obs = list(observed[big])
    cells_exp = list(counts[big])

    pooled = 0
    small = np.nonzero(~big & support)[0]
    small = small[np.argsort(counts[small], kind='stable')]
    bucket_obs = bucket_exp = 0.0
    bucket_size = 0
    for i in small:
        bucket_obs += observed[i]
        bucket_exp += counts[i]
        bucket_size += 1
        if bucket_exp >= MIN_EXPECTED_COUNT:
            cells_obs.append(bucket_obs)
            cells_exp.append(bucket_exp)
            pooled += bucket_size
            bucket_obs = bucket_exp = 0.0
            bucket_size = 0
    if bucket_size:
        if cells_exp:
            # fold the remainder into the smallest kept cell
            j = int(np.argmin(cells_exp))
            cells_obs[j] += bucket_obs
            cells_exp[j] += bucket_exp
        else:
            cells_obs.append(bucket_obs)
            cells_exp.append(bucket_exp)
        pooled += bucket_size

    cells_obs = np.asarray(cells_obs)
    cells_exp = np.asarray(cells_exp)
    statistic = float(np.sum((cells_obs - cells_exp) ** 2 / cells_exp))
    df = max(cells_exp.size - 1, 1)
    p_value = float(stats.chi2.sf(statistic, df))
    return ChiSquareResult(statistic=statistic, df=df, p_value=p_value, pooled_cells=pooled)


def compare_samples(draws: Sequence[SampleSet], kernel) -> dict:
    """TV distance and chi-square of a batch of draws against the exact pmf"""
    exact = enumerate_distribution(kernel)
    counts = observed_counts(draws, exact.n)
    empirical = counts / max(int(counts.sum()), 1)
    return {
        'tv': total_variation(empirical, exact.probabilities),
        'chi_square': chi_square_stat(counts, exact),
    }


def homogeneity_test(first, second) -> ChiSquareResult:
    """Chi-square test that two histograms over the same subsets share one distribution.

    Subsets seen fewer than 10 times in total are pooled into one cell.
    """
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    if first.shape != second.shape:
        raise ValidationError(f'histograms differ in size: {first.shape} vs {second.shape}')
    combined = first + second
    rare = combined < 2 * MIN_EXPECTED_COUNT
    table = np.vstack([first[~rare], second[~rare]])
    pooled = int(np.count_nonzero(rare & (combined > 0)))
    if pooled:
        table = np.column_stack([table, [first[rare].sum(), second[rare].sum()]])
    if table.shape[1] < 2 or np.any(table.sum(axis=1) == 0):
        return ChiSquareResult(statistic=0.0, df=0, p_value=1.0, pooled_cells=pooled)
    statistic, p_value, df, _ = stats.chi2_contingency(table, correction=False)
    return ChiSquareResult(statistic=float(statistic), df=int(df), p_value=float(p_value),
                           pooled_cells=pooled)
