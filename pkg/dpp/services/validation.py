"""
Invariant suites run by `dpp validate`: exact checks against the
enumeration oracle and statistical checks of the three samplers.
"""
import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np

from dpp.config import TEXTURE_IMAGE
from dpp.models.kernel import KernelMatrix
from dpp.services.factory import MODELS, build_model
from dpp.services.kernels import expected_cardinality
from dpp.services.numerics import herm_eigendecomposition, validate_kernel
from dpp.services.oracle import (
    chi_square_stat, enumerate_distribution, homogeneity_test, inclusion_probabilities,
    mobius_invert, observed_counts, total_variation, zeta_transform
)
from dpp.services.patches import load_pgm
from dpp.services.samplers import (
    bernoulli_envelope, conditional_inclusion, envelope_bound, marginal, sample_bernoulli,
    sample_spectral, sample_sequential, sample_thinning
)
from dpp.utils.errors import DPPError, ValidationError
from dpp.utils.rng import derive_seeds, stream_seed

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-8
SLACK = 1e-9
POSITIVE = 1e-9
TV_LIMIT = 0.01
CHI2_LEVEL = 0.001
MONOTONICITY_MAX_N = 6
AGREEMENT_MAX_N = 6
BOUND_DRAWS = 10000
REPORT_COLUMNS = ['suite', 'model', 'n', 'passed', 'metric', 'detail']
ALGOS = ('spectral', 'sequential', 'thinning')


@dataclass
class SuiteResult:
    suite: str
    model: str
    n: int
    passed: bool
    metric: float = 0.0
    detail: str = ''

    def to_dict(self):
        return {
            'suite': self.suite, 'model': self.model, 'n': self.n,
            'passed': 'true' if self.passed else 'false',
            'metric': f'{self.metric:.6g}', 'detail': self.detail,
        }


@dataclass
class ValidationReport:
    results: List[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[SuiteResult]:
        return [r for r in self.results if not r.passed]

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            status = 'PASS' if r.passed else 'FAIL'
            lines.append(f'{status}  {r.suite:<22} {r.model:<11} n={r.n:<3} metric={r.metric:.4g}  {r.detail}')
        lines.append(f'{len(self.results) - len(self.failures)}/{len(self.results)} checks passed')
        return '\n'.join(lines) + '\n'

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=REPORT_COLUMNS, lineterminator='\n')
        writer.writeheader()
        for r in self.results:
            writer.writerow(r.to_dict())
        return out.getvalue()


@dataclass
class SuiteContext:
    """One kernel under test plus lazily computed shared data"""
    model: str
    kernel: KernelMatrix
    seed: int
    draws: int
    _pmf: np.ndarray = None
    _counts: Dict[str, np.ndarray] = field(default_factory=dict)
    _sizes: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.kernel.n

    @property
    def pmf(self) -> np.ndarray:
        if self._pmf is None:
            self._pmf = enumerate_distribution(self.kernel).probabilities
        return self._pmf

    def sampler_counts(self, algo: str):
        """(subset histogram, sizes) of `draws` seeded draws of one sampler"""
        if algo not in self._counts:
            seeds = derive_seeds(stream_seed(self.seed, ALGOS.index(algo)), self.draws)
            if algo == 'spectral':
                eig = herm_eigendecomposition(self.kernel.matrix, check=False)
                samples = [sample_spectral(self.kernel, s, eig=eig) for s in seeds]
            elif algo == 'thinning':
                envelope = bernoulli_envelope(self.kernel)
                samples = [sample_thinning(self.kernel, envelope, s) for s in seeds]
            else:
                samples = [sample_sequential(self.kernel, s) for s in seeds]
            self._counts[algo] = observed_counts(samples, self.n)
            self._sizes[algo] = np.array([len(s) for s in samples])
        return self._counts[algo], self._sizes[algo]


def _positions(mask: int, n: int) -> List[int]:
    return [i + 1 for i in range(n) if mask >> i & 1]


def check_spectrum(ctx: SuiteContext) -> SuiteResult:
    report = validate_kernel(ctx.kernel.matrix)
    metric = report.max_eigenvalue if report.max_eigenvalue is not None else 0.0
    return SuiteResult('kernel_spectrum', ctx.model, ctx.n, report.ok, metric,
                       '; '.join(report.violations) or f'{report.method} check')


def check_normalization(ctx: SuiteContext) -> SuiteResult:
    error = abs(float(ctx.pmf.sum()) - 1.0)
    return SuiteResult('normalization', ctx.model, ctx.n, error <= EXACT_TOL, error, 'sum of P(Y = A)')


def check_mobius(ctx: SuiteContext) -> SuiteResult:
    inclusion = inclusion_probabilities(ctx.kernel)
    forward = float(np.max(np.abs(zeta_transform(ctx.pmf) - inclusion)))
    backward = float(np.max(np.abs(mobius_invert(inclusion) - ctx.pmf)))
    error = max(forward, backward)
    return SuiteResult('mobius_consistency', ctx.model, ctx.n, error <= EXACT_TOL, error,
                       'superset sums of the pmf vs det(K_A)')


def check_marginals(ctx: SuiteContext) -> SuiteResult:
    n = ctx.n
    masks = np.arange(1 << n)
    worst = 0.0
    # every element is in A, in B, or free
    for labels in itertools.product((0, 1, 2), repeat=n):
        a = sum(1 << i for i, label in enumerate(labels) if label == 1)
        b = sum(1 << i for i, label in enumerate(labels) if label == 2)
        expected = float(ctx.pmf[((masks & a) == a) & ((masks & b) == 0)].sum())
        value = marginal(ctx.kernel, _positions(a, n), _positions(b, n))
        worst = max(worst, abs(value - expected))
    return SuiteResult('marginal_consistency', ctx.model, n, worst <= EXACT_TOL, worst,
                       f'{3 ** n} disjoint (A, B) pairs')


def check_monotonicity(ctx: SuiteContext) -> SuiteResult:
    n = ctx.n
    if n > MONOTONICITY_MAX_N:
        return SuiteResult('monotonicity', ctx.model, n, True, 0.0, f'skipped above n={MONOTONICITY_MAX_N}')
    violations = 0
    worst = 0.0
    checked = 0
    for labels in itertools.product((0, 1, 2), repeat=n):
        a = [i + 1 for i, label in enumerate(labels) if label == 1]
        b = [i + 1 for i, label in enumerate(labels) if label == 2]
        free = [i + 1 for i, label in enumerate(labels) if label == 0]
        if marginal(ctx.kernel, a, b) <= POSITIVE:
            continue
        for k, l in itertools.permutations(free, 2):
            if marginal(ctx.kernel, a + [l], b) <= POSITIVE or marginal(ctx.kernel, a, b + [l]) <= POSITIVE:
                continue
            middle = conditional_inclusion(ctx.kernel, a, b, k)
            low = conditional_inclusion(ctx.kernel, a + [l], b, k)
            high = conditional_inclusion(ctx.kernel, a, b + [l], k)
            excess = max(low - middle, middle - high)
            worst = max(worst, excess)
            checked += 1
            if excess > SLACK:
                violations += 1
    return SuiteResult('monotonicity', ctx.model, n, violations == 0, worst,
                       f'{violations} violations in {checked} chains')


def check_envelope(ctx: SuiteContext) -> SuiteResult:
    n = ctx.n
    q = bernoulli_envelope(ctx.kernel).q
    masks = np.arange(1 << n)
    worst = -math.inf
    violations = 0
    for k in range(n):
        # P(Y_1..Y_{k+1} = pattern), pattern indexed by its low k+1 bits
        prefix = np.bincount(masks & ((1 << (k + 1)) - 1), weights=ctx.pmf, minlength=1 << (k + 1))
        history = prefix[:1 << k] + prefix[1 << k:]
        positive = history > POSITIVE
        conditional = prefix[1 << k:][positive] / history[positive]
        if conditional.size:
            excess = float(np.max(conditional - q[k]))
            worst = max(worst, excess)
            violations += int(np.sum(conditional > q[k] + SLACK))
    return SuiteResult('envelope_dominance', ctx.model, n, violations == 0, worst,
                       f'max of P(Y_k = 1 | history) - q_k; {violations} violations')


def check_cardinality_bound(ctx: SuiteContext) -> SuiteResult:
    bound = envelope_bound(ctx.kernel)
    if math.isinf(bound):
        return SuiteResult('cardinality_bound', ctx.model, ctx.n, True, 0.0, 'projection kernel, unbounded')
    q = bernoulli_envelope(ctx.kernel).q
    seeds = derive_seeds(stream_seed(ctx.seed, len(ALGOS)), BOUND_DRAWS)
    sizes = np.array([len(sample_bernoulli(q, s)) for s in seeds])
    slack = 3.0 * math.sqrt(float(np.sum(q * (1.0 - q))) / BOUND_DRAWS)
    mean = float(sizes.mean())
    return SuiteResult('cardinality_bound', ctx.model, ctx.n, mean <= bound + slack, mean,
                       f'mean |X| vs bound {bound:.4g}')


def check_agreement(ctx: SuiteContext) -> List[SuiteResult]:
    """TV distance and goodness of fit for each sampler, then pairwise homogeneity"""
    results = []
    n = ctx.n
    if n > AGREEMENT_MAX_N:
        return [SuiteResult('sampler_agreement', ctx.model, n, True, 0.0, f'skipped above n={AGREEMENT_MAX_N}')]
    for algo in ALGOS:
        counts, _ = ctx.sampler_counts(algo)
        tv = total_variation(counts / ctx.draws, ctx.pmf)
        fit = chi_square_stat(counts, ctx.pmf)
        passed = tv < TV_LIMIT and not fit.rejects(CHI2_LEVEL)
        results.append(SuiteResult('sampler_agreement', ctx.model, n, passed, tv,
                                   f'{algo}: TV over {ctx.draws} draws, chi2 p={fit.p_value:.3g}'))
    for first, second in itertools.combinations(ALGOS, 2):
        test = homogeneity_test(ctx.sampler_counts(first)[0], ctx.sampler_counts(second)[0])
        results.append(SuiteResult('sampler_agreement', ctx.model, n, not test.rejects(CHI2_LEVEL),
                                   test.p_value, f'{first} vs {second} homogeneity p-value'))
    return results


def check_cardinality_mean(ctx: SuiteContext) -> List[SuiteResult]:
    results = []
    if ctx.n > AGREEMENT_MAX_N:
        return results
    trace = expected_cardinality(ctx.kernel)
    for algo in ALGOS:
        _, sizes = ctx.sampler_counts(algo)
        error = abs(float(sizes.mean()) - trace)
        stderr = float(sizes.std()) / math.sqrt(sizes.size)
        passed = error <= 3.0 * stderr if stderr > 0 else error <= 1e-9
        results.append(SuiteResult('cardinality_mean', ctx.model, ctx.n, passed, error,
                                   f'{algo}: |mean |Y| - tr K|, 3 SE = {3.0 * stderr:.3g}'))
    return results


def check_permutation(ctx: SuiteContext) -> SuiteResult:
    """Thinning on a relabeled kernel, mapped back, matches the original pmf"""
    n = ctx.n
    if n > AGREEMENT_MAX_N:
        return SuiteResult('permutation_invariance', ctx.model, n, True, 0.0, f'skipped above n={AGREEMENT_MAX_N}')
    rng = np.random.default_rng(stream_seed(ctx.seed, len(ALGOS) + 1))
    perm = rng.permutation(n)
    permuted = KernelMatrix(matrix=ctx.kernel.matrix[np.ix_(perm, perm)])
    envelope = bernoulli_envelope(permuted)
    seeds = derive_seeds(stream_seed(ctx.seed, len(ALGOS) + 2), ctx.draws)
    counts = np.zeros(1 << n, dtype=np.int64)
    for s in seeds:
        sample = sample_thinning(permuted, envelope, s)
        mask = 0
        for position in sample.positions:
            mask |= 1 << int(perm[position])
        counts[mask] += 1
    tv = total_variation(counts / ctx.draws, ctx.pmf)
    return SuiteResult('permutation_invariance', ctx.model, n, tv < TV_LIMIT, tv,
                       f'thinning on relabeled ground set, perm={(perm + 1).tolist()}')


SUITES: Dict[str, Callable] = {
    'kernel_spectrum': check_spectrum,
    'normalization': check_normalization,
    'mobius_consistency': check_mobius,
    'marginal_consistency': check_marginals,
    'monotonicity': check_monotonicity,
    'envelope_dominance': check_envelope,
    'cardinality_bound': check_cardinality_bound,
    'sampler_agreement': check_agreement,
    'cardinality_mean': check_cardinality_mean,
    'permutation_invariance': check_permutation,
}


def _run_suite(name: str, ctx: SuiteContext) -> List[SuiteResult]:
    try:
        outcome = SUITES[name](ctx)
    except DPPError as e:
        logger.error(f'Suite {name} failed on {ctx.model}: {e}')
        return [SuiteResult(name, ctx.model, ctx.n, False, math.nan, f'{type(e).__name__}: {e}')]
    return outcome if isinstance(outcome, list) else [outcome]


EXACT_SUITES = ('kernel_spectrum', 'normalization', 'mobius_consistency',
                'marginal_consistency', 'envelope_dominance')
SAMPLED_SUITES = ('monotonicity', 'cardinality_bound', 'sampler_agreement',
                  'cardinality_mean', 'permutation_invariance')


def validation_kernels(n: int, seed: int, models: Sequence[str] = MODELS) -> List[KernelMatrix]:
    """One kernel per model on n points; projection kernels get rank n // 2"""
    image = load_pgm(TEXTURE_IMAGE) if 'patch' in models else None
    kernels = []
    for index, model in enumerate(models):
        options = {'rank': max(1, n // 2)} if model == 'projection' else {}
        built = build_model(model, n, stream_seed(seed, index), image=image, **options)
        kernels.append(built.kernel)
    return kernels


def _check_suites(suites: Sequence[str]) -> List[str]:
    suites = list(SUITES) if not suites else list(suites)
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ValidationError(f'unknown suites {unknown}; expected some of {list(SUITES)}')
    return suites


def run_validation(kernels: Sequence[KernelMatrix], draws: int, seed: int,
                   suites: Sequence[str] = None) -> ValidationReport:
    """Run the selected suites (all by default) on every kernel.

    A kernel failing the spectrum check is not fed to the other suites.
    """
    suites = _check_suites(suites)
    if draws < 1:
        raise ValidationError(f'draws must be positive, got {draws}')

    report = ValidationReport()
    for index, kernel in enumerate(kernels):
        ctx = SuiteContext(model=kernel.tag, kernel=kernel, seed=stream_seed(seed, 1000 + index), draws=draws)
        spectrum = check_spectrum(ctx)
        if 'kernel_spectrum' in suites or not spectrum.passed:
            report.results.append(spectrum)
        if not spectrum.passed:
            logger.warning(f'Kernel {ctx.model} is not a valid DPP kernel; skipping its other suites')
            continue
        for name in suites:
            if name != 'kernel_spectrum':
                report.results.extend(_run_suite(name, ctx))
        logger.info(f'Validated {ctx.model} n={ctx.n}')
    return report


def validate_models(max_n: int, draws: int, seed: int, suites: Sequence[str] = None,
                    models: Sequence[str] = MODELS) -> ValidationReport:
    """Exact suites on n = max_n, sampling suites on n = min(max_n, 6)"""
    suites = _check_suites(suites)
    if max_n < 1:
        raise ValidationError(f'max-n must be at least 1, got {max_n}')
    small_n = min(max_n, AGREEMENT_MAX_N)
    exact = [s for s in suites if s in EXACT_SUITES]
    sampled = [s for s in suites if s in SAMPLED_SUITES]
    if small_n == max_n:
        return run_validation(validation_kernels(max_n, seed, models), draws, seed, exact + sampled)

    report = ValidationReport()
    if exact:
        report.results.extend(run_validation(validation_kernels(max_n, seed, models), draws, seed, exact).results)
    if sampled:
        report.results.extend(run_validation(validation_kernels(small_n, seed, models), draws, seed, sampled).results)
    return report
