"""
Tests for exact probabilities, the Bernoulli envelope and the three samplers
"""
import itertools

import numpy as np
import pytest

from dpp.models.sample import BernoulliEnvelope, SampleSet
from dpp.services.kernels import build_random
from dpp.services.numerics import herm_eigendecomposition
from dpp.services.oracle import chi_square_stat, enumerate_distribution, observed_counts
from dpp.services.samplers import (
    bernoulli_envelope, conditional_inclusion, dpp_probability, draw, envelope_bound, marginal,
    sample_bernoulli, sample_spectral, sample_thinning
)
from dpp.utils.errors import EnvelopeViolationError, UndefinedConditionalError, ValidationError
from dpp.utils.rng import derive_seeds
from dpp.utils.timing import StepTimer

ALGOS = ['spectral', 'sequential', 'thinning']


@pytest.mark.unit
@pytest.mark.samplers
class TestProbabilities:
    """Test P(Y = A), marginals and conditionals"""

    def test_two_point_pmf(self, two_point_kernel):
        """Test the four subset probabilities of the two-point kernel"""
        values = [dpp_probability(two_point_kernel, s) for s in [(), (1,), (2,), (1, 2)]]
        np.testing.assert_allclose(values, [0.1875, 0.3125, 0.3125, 0.1875])

    def test_independent_points(self, diagonal_kernel):
        """Test diag(0.3, 0.7) and A = {1}"""
        assert dpp_probability(diagonal_kernel, [1]) == pytest.approx(0.09)

    def test_marginal_hand_value(self, two_point_kernel):
        """Test P(1 in Y, 2 not in Y)"""
        assert marginal(two_point_kernel, [1], [2]) == pytest.approx(0.3125)

    def test_marginal_inclusion_only(self, two_point_kernel):
        """Test P(A in Y) = det K_A"""
        assert marginal(two_point_kernel, [1, 2]) == pytest.approx(0.25 - 0.0625)

    def test_marginal_zero_when_exclusion_impossible(self):
        """Test excluding a point with K(k,k) = 1"""
        assert marginal(np.diag([1.0, 0.5]), [2], [1]) == 0.0

    def test_conditional_hand_value(self, two_point_kernel):
        """Test P(1 in Y | 2 not in Y)"""
        assert conditional_inclusion(two_point_kernel, [], [2], 1) == pytest.approx(0.625)

    def test_conditional_matches_marginal_ratio(self, random_kernel):
        """Test conditionals against ratios of marginals"""
        for a, b, k in [([1], [2], 3), ([2, 4], [1], 6), ([], [3, 5], 2), ([1, 2, 3], [], 4)]:
            expected = marginal(random_kernel, a + [k], b) / marginal(random_kernel, a, b)
            assert conditional_inclusion(random_kernel, a, b, k) == pytest.approx(expected, rel=1e-8)

    def test_conditional_undefined(self):
        """Test conditioning on an event of probability zero"""
        with pytest.raises(UndefinedConditionalError):
            conditional_inclusion(np.diag([0.0, 0.5]), [1], [], 2)
        with pytest.raises(UndefinedConditionalError):
            conditional_inclusion(np.diag([1.0, 0.5]), [], [1], 2)

    def test_overlapping_sets_rejected(self, two_point_kernel):
        """Test A and B must be disjoint"""
        with pytest.raises(ValidationError):
            marginal(two_point_kernel, [1], [1])

    def test_index_out_of_range(self, two_point_kernel):
        """Test a 1-based index past n"""
        with pytest.raises(ValidationError):
            dpp_probability(two_point_kernel, [3])

    def test_pmf_sums_to_one(self, complex_kernel):
        """Test the pmf of a complex kernel sums to 1"""
        total = sum(dpp_probability(complex_kernel, s)
                    for r in range(6) for s in itertools.combinations(range(1, 6), r))
        assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.unit
@pytest.mark.samplers
class TestEnvelope:
    """Test the Bernoulli envelope and the cardinality bound"""

    def test_diagonal_kernel(self, diagonal_kernel):
        """Test q equals the diagonal when K is diagonal"""
        envelope = bernoulli_envelope(diagonal_kernel)
        np.testing.assert_allclose(envelope.q, [0.3, 0.7])
        assert envelope.degenerate_from is None

    def test_two_point_kernel(self, two_point_kernel):
        """Test q = (0.5, 0.625)"""
        np.testing.assert_allclose(bernoulli_envelope(two_point_kernel).q, [0.5, 0.625])

    def test_degenerate_projection(self, projection_pair):
        """Test I - K singular at index 2 forces q_2 = 1"""
        envelope = bernoulli_envelope(projection_pair)
        np.testing.assert_allclose(envelope.q, [0.5, 1.0])
        assert envelope.degenerate_from == 2

    def test_dominates_diagonal(self, random_kernel):
        """Test q_k >= K(k,k)"""
        envelope = bernoulli_envelope(random_kernel)
        assert np.all(envelope.q >= np.diag(random_kernel.matrix) - 1e-12)
        assert np.all(envelope.q <= 1.0)

    def test_ascending_order(self, random_kernel):
        """Test the ascending-diagonal order visits points by K(k,k)"""
        envelope = bernoulli_envelope(random_kernel, order='ascending-diagonal')
        diagonal = np.diag(random_kernel.matrix)
        assert np.all(np.diff(diagonal[envelope.order]) >= 0)
        assert envelope.q[0] == pytest.approx(diagonal[envelope.order[0]])

    def test_unknown_order(self, random_kernel):
        """Test an unknown order name"""
        with pytest.raises(ValidationError):
            bernoulli_envelope(random_kernel, order='random')

    def test_bound_values(self, two_point_kernel):
        """Test the bound for diag(0.5, 0.5) and the two-point kernel"""
        assert envelope_bound(np.diag([0.5, 0.5])) == pytest.approx(1.5)
        assert envelope_bound(two_point_kernel) == pytest.approx(2.5)

    def test_bound_infinite_for_projection(self, projection_pair):
        """Test lambda_max = 1"""
        assert envelope_bound(projection_pair) == float('inf')

    def test_sum_q_below_bound(self, random_kernel):
        """Test E|X| = sum q stays under the bound"""
        assert bernoulli_envelope(random_kernel).expected_size <= envelope_bound(random_kernel) + 1e-9


@pytest.mark.unit
@pytest.mark.samplers
class TestSamplerBasics:
    """Test determinism and degenerate kernels"""

    @pytest.mark.parametrize('algo', ALGOS)
    def test_same_seed_same_sample(self, random_kernel, algo):
        """Test a (kernel, seed) pair reproduces its draw"""
        assert draw(algo, random_kernel, 42).indices == draw(algo, random_kernel, 42).indices

    @pytest.mark.parametrize('algo', ALGOS)
    def test_zero_kernel(self, algo):
        """Test K = 0 gives the empty set"""
        assert draw(algo, np.zeros((4, 4)), 1).indices == ()

    @pytest.mark.parametrize('algo', ALGOS)
    def test_identity_kernel(self, algo):
        """Test K = I gives the full ground set"""
        assert draw(algo, np.eye(4), 1).indices == (1, 2, 3, 4)

    @pytest.mark.parametrize('algo', ALGOS)
    def test_projection_cardinality(self, projection_kernel, algo):
        """Test a rank-3 projection always draws 3 points"""
        for seed in range(10):
            assert len(draw(algo, projection_kernel, seed)) == 3

    @pytest.mark.parametrize('algo', ALGOS)
    def test_complex_kernel(self, complex_kernel, algo):
        """Test complex kernels produce valid samples"""
        sample = draw(algo, complex_kernel, 7)
        assert sample.algo == algo
        assert all(1 <= i <= 5 for i in sample.indices)

    def test_unknown_algorithm(self, random_kernel):
        """Test draw rejects unknown names"""
        with pytest.raises(ValidationError):
            draw('gibbs', random_kernel, 1)

    def test_spectral_reuses_decomposition(self, random_kernel):
        """Test a stored eigendecomposition gives the same draw"""
        eig = herm_eigendecomposition(random_kernel.matrix)
        assert sample_spectral(random_kernel, 3, eig=eig).indices == sample_spectral(random_kernel, 3).indices

    def test_spectral_rejects_wrong_decomposition(self, random_kernel):
        """Test an eigendecomposition of another size"""
        eig = herm_eigendecomposition(np.eye(2))
        with pytest.raises(ValidationError):
            sample_spectral(random_kernel, 3, eig=eig)

    def test_thinning_reuses_envelope(self, random_kernel):
        """Test a precomputed envelope gives the same draw"""
        envelope = bernoulli_envelope(random_kernel)
        assert sample_thinning(random_kernel, envelope, 5).indices == sample_thinning(random_kernel, seed=5).indices

    def test_envelope_violation_detected(self, two_point_kernel):
        """Test an envelope below p_1 = 0.5 is caught"""
        envelope = BernoulliEnvelope(q=np.array([0.3, 0.3]))
        with pytest.raises(EnvelopeViolationError):
            for seed in range(200):
                sample_thinning(two_point_kernel, envelope, seed)

    def test_envelope_size_mismatch(self, two_point_kernel):
        """Test an envelope of the wrong length"""
        with pytest.raises(ValidationError):
            sample_thinning(two_point_kernel, BernoulliEnvelope(q=np.ones(3)), 1)

    @pytest.mark.parametrize('algo, steps', [
        ('spectral', ['eigendecomposition', 'frequency_selection', 'sequential_draw']),
        ('thinning', ['envelope_preprocess', 'bernoulli_draw', 'sequential_thinning']),
        ('sequential', ['sequential_sampling']),
    ])
    def test_step_timings(self, random_kernel, algo, steps):
        """Test each sampler reports its named steps"""
        timer = StepTimer()
        draw(algo, random_kernel, 1, timer=timer)
        assert list(timer.milliseconds()) == steps

    def test_bernoulli(self):
        """Test coins with probabilities 0 and 1"""
        assert sample_bernoulli([0.0, 1.0, 0.0, 1.0], 3).indices == (2, 4)

    def test_bernoulli_rejects_bad_q(self):
        """Test q outside [0, 1]"""
        with pytest.raises(ValidationError):
            sample_bernoulli([0.5, 1.5], 3)

    def test_sample_text(self):
        """Test the sample text format"""
        sample = SampleSet.from_positions([4, 0, 2], seed=9, algo='thinning')
        assert sample.to_text() == 'seed=9 algo=thinning\n1,3,5\n'
        assert SampleSet.from_text(sample.to_text()) == sample


def empirical_fit(kernel, algo, count, seed, **kwargs):
    exact = enumerate_distribution(kernel)
    samples = [draw(algo, kernel, s, **kwargs) for s in derive_seeds(seed, count)]
    return chi_square_stat(observed_counts(samples, exact.n), exact)


@pytest.mark.integration
@pytest.mark.samplers
class TestSamplerDistribution:
    """Test the samplers against the exact distribution"""

    @pytest.mark.parametrize('algo', ALGOS)
    def test_random_kernel_fit(self, algo):
        """Test a four-point random kernel over 4000 draws"""
        fit = empirical_fit(build_random(4, seed=21), algo, 4000, seed=100)
        assert fit.p_value > 1e-4

    @pytest.mark.parametrize('algo', ALGOS)
    def test_two_point_kernel_fit(self, two_point_kernel, algo):
        """Test the two-point kernel over 4000 draws"""
        fit = empirical_fit(two_point_kernel, algo, 4000, seed=200)
        assert fit.p_value > 1e-4

    def test_thinning_ascending_order_fit(self):
        """Test thinning with the ascending-diagonal visiting order"""
        kernel = build_random(4, seed=22)
        envelope = bernoulli_envelope(kernel, order='ascending-diagonal')
        fit = empirical_fit(kernel, 'thinning', 4000, seed=300, envelope=envelope)
        assert fit.p_value > 1e-4

    @pytest.mark.slow
    @pytest.mark.parametrize('algo', ALGOS)
    def test_complex_kernel_fit(self, complex_kernel, algo):
        """Test the five-point Ginibre kernel over 20000 draws"""
        fit = empirical_fit(complex_kernel, algo, 20000, seed=400)
        assert fit.p_value > 1e-4
