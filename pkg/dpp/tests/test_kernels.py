"""
Tests for kernel models, K <-> L conversion and calibration
"""
import math

import numpy as np
import pytest

from dpp.models.kernel import LEnsemble
from dpp.services.factory import build_model
from dpp.services.kernels import (
    build_ginibre, build_patch_gaussian, build_projection, build_random, calibrate_alpha,
    calibrated_kernel, expected_cardinality, ginibre_points, k_from_l, l_from_k, numerical_rank
)
from dpp.services.numerics import validate_kernel
from dpp.utils.errors import NoLEnsembleError, UnreachableTargetError, ValidationError


@pytest.mark.unit
@pytest.mark.kernels
class TestConversion:
    """Test K = L (I + L)^-1 and its inverse"""

    def test_diagonal_k_from_l(self):
        """Test L = diag(1, 3) gives K = diag(0.5, 0.75)"""
        kernel = k_from_l(np.diag([1.0, 3.0]))
        np.testing.assert_allclose(kernel.matrix, np.diag([0.5, 0.75]))

    def test_round_trip_on_random_ensemble(self, random_kernel):
        """Test l_from_k inverts k_from_l"""
        ensemble = l_from_k(random_kernel)
        np.testing.assert_allclose(k_from_l(ensemble).matrix, random_kernel.matrix, atol=1e-9)

    def test_projection_has_no_ensemble(self, projection_pair):
        """Test an eigenvalue at 1 is reported"""
        with pytest.raises(NoLEnsembleError):
            l_from_k(projection_pair)

    def test_provenance_carried(self):
        """Test the ensemble tag follows the conversion"""
        kernel = k_from_l(build_ginibre(4))
        assert kernel.tag == 'ginibre'


@pytest.mark.unit
@pytest.mark.kernels
class TestModels:
    """Test the four kernel models"""

    def test_random_is_valid_and_seeded(self):
        """Test the random model is a valid kernel and reproducible"""
        first = build_random(20, seed=3)
        second = build_random(20, seed=3)
        other = build_random(20, seed=4)
        assert validate_kernel(first.matrix).ok
        np.testing.assert_array_equal(first.matrix, second.matrix)
        assert not np.allclose(first.matrix, other.matrix)

    def test_random_rejects_empty_ground_set(self):
        """Test n = 0"""
        with pytest.raises(ValidationError):
            build_random(0, seed=1)

    def test_ginibre_single_point(self):
        """Test n = 1 sits at the origin with L = 1/pi"""
        ensemble = build_ginibre(1)
        assert ensemble.matrix[0, 0] == pytest.approx(1.0 / math.pi)

    def test_ginibre_grid(self):
        """Test the first points of the centred 3x3 grid"""
        points = ginibre_points(9)
        assert points[4] == 0
        assert points.size == 9
        assert np.all(np.abs(points.real) <= 1) and np.all(np.abs(points.imag) <= 1)

    def test_ginibre_is_hermitian_and_positive(self):
        """Test the Ginibre ensemble is Hermitian PSD and complex"""
        ensemble = build_ginibre(16)
        assert np.iscomplexobj(ensemble.matrix)
        np.testing.assert_allclose(ensemble.matrix, ensemble.matrix.conj().T)
        assert validate_kernel(k_from_l(ensemble).matrix).ok

    def test_patch_kernel_at_bandwidth_distance(self):
        """Test two patches a distance s apart have L = e^-1"""
        ensemble = build_patch_gaussian(np.array([[0.0, 0.0], [3.0, 0.0]]), 3.0)
        assert ensemble.matrix[0, 1] == pytest.approx(math.exp(-1.0))
        np.testing.assert_allclose(np.diag(ensemble.matrix), 1.0)

    def test_patch_kernel_orthogonal_vectors(self):
        """Test three orthonormal vectors give e^-2 off the diagonal"""
        ensemble = build_patch_gaussian(np.eye(3), 1.0)
        off_diagonal = ensemble.matrix[~np.eye(3, dtype=bool)]
        np.testing.assert_allclose(off_diagonal, math.exp(-2.0))

    def test_patch_kernel_rejects_zero_bandwidth(self):
        """Test s = 0"""
        with pytest.raises(ValidationError):
            build_patch_gaussian(np.eye(3), 0.0)

    def test_full_rank_projection_is_identity(self):
        """Test rank = n gives the identity"""
        np.testing.assert_allclose(build_projection(4, 4, seed=2).matrix, np.eye(4), atol=1e-12)

    def test_projection_trace_and_idempotence(self):
        """Test rank 3 on 8 points"""
        kernel = build_projection(8, 3, seed=9)
        assert expected_cardinality(kernel) == pytest.approx(3.0)
        np.testing.assert_allclose(kernel.matrix @ kernel.matrix, kernel.matrix, atol=1e-12)

    @pytest.mark.parametrize('rank', [0, 9])
    def test_projection_rank_out_of_range(self, rank):
        """Test rank outside 1..n"""
        with pytest.raises(ValidationError):
            build_projection(8, rank, seed=1)


@pytest.mark.unit
@pytest.mark.kernels
class TestCalibration:
    """Test expected-cardinality calibration"""

    def test_expected_cardinality(self):
        """Test tr K for L = diag(1, 3)"""
        assert expected_cardinality(k_from_l(np.diag([1.0, 3.0]))) == pytest.approx(1.25)

    def test_identity_half(self):
        """Test L = I_10 with target 5 needs alpha = 1"""
        result = calibrate_alpha(np.eye(10), 5.0)
        assert result.alpha == pytest.approx(1.0, rel=1e-6)

    @pytest.mark.parametrize('method', ['eigen', 'trace'])
    def test_identity_two(self, method):
        """Test L = I_2 with target 4/3 needs alpha = 2"""
        result = calibrate_alpha(np.eye(2), 4.0 / 3.0, method=method)
        assert result.alpha == pytest.approx(2.0, rel=1e-6)
        assert result.achieved_expected_cardinality == pytest.approx(4.0 / 3.0, rel=1e-7)

    @pytest.mark.parametrize('method', ['eigen', 'trace'])
    def test_unreachable_target(self, method):
        """Test a target at the rank of L"""
        with pytest.raises(UnreachableTargetError):
            calibrate_alpha(np.diag([1.0, 1.0, 0.0]), 2.0, method=method)

    @pytest.mark.parametrize('method', ['eigen', 'trace'])
    def test_target_above_rank(self, method):
        """Test a target between the rank and n"""
        with pytest.raises(UnreachableTargetError):
            calibrate_alpha(np.diag([1.0, 2.0, 0.0]), 2.5, method=method)

    def test_trace_breakdown_is_unreachable(self):
        """Test a target needing alpha beyond what I + alpha L can factor"""
        with pytest.raises(UnreachableTargetError):
            calibrate_alpha(np.diag([1.0, 1e-9, 0.0]), 1.9999, method='trace')

    def test_non_positive_target(self):
        """Test target 0"""
        with pytest.raises(ValidationError):
            calibrate_alpha(np.eye(3), 0.0)

    def test_calibrated_kernel_hits_target(self):
        """Test the calibrated Ginibre kernel has trace equal to the target"""
        kernel, calibration = calibrated_kernel(build_ginibre(25), 4.0)
        assert expected_cardinality(kernel) == pytest.approx(4.0, rel=1e-6)
        assert kernel.provenance['alpha'] == pytest.approx(calibration.alpha)

    def test_numerical_rank(self):
        """Test eigenvalues below the relative cut are not counted"""
        assert numerical_rank([0.0, 1e-14, 0.5, 2.0]) == 2
        assert numerical_rank([0.0, 0.0]) == 0


@pytest.mark.unit
@pytest.mark.kernels
class TestFactory:
    """Test build_model dispatch"""

    def test_random_calibrated(self):
        """Test the random model calibrated to E|Y| = 3"""
        built = build_model('random', 30, seed=1, expected_card=3.0)
        assert expected_cardinality(built.kernel) == pytest.approx(3.0, rel=1e-6)
        assert built.calibration is not None

    def test_random_uncalibrated(self):
        """Test the random model without a target is the raw kernel"""
        built = build_model('random', 10, seed=1)
        np.testing.assert_array_equal(built.kernel.matrix, build_random(10, 1).matrix)
        assert built.calibration is None

    def test_projection_from_integer_card(self):
        """Test an integer expected cardinality sets the rank"""
        built = build_model('projection', 10, seed=1, expected_card=4)
        assert expected_cardinality(built.kernel) == pytest.approx(4.0)

    def test_projection_rejects_both(self):
        """Test rank and expected cardinality together"""
        with pytest.raises(ValidationError):
            build_model('projection', 10, seed=1, expected_card=4, rank=4)

    def test_projection_needs_integer(self):
        """Test a fractional target for a projection"""
        with pytest.raises(ValidationError):
            build_model('projection', 10, seed=1, expected_card=2.5)

    def test_patch_model(self, texture):
        """Test the patch model on the bundled texture"""
        built = build_model('patch', 40, seed=2, expected_card=5.0, image=texture)
        assert built.kernel.n == 40
        assert expected_cardinality(built.kernel) == pytest.approx(5.0, rel=1e-6)

    def test_patch_model_needs_image(self):
        """Test the patch model without an image"""
        with pytest.raises(ValidationError):
            build_model('patch', 10, seed=1)

    def test_unknown_model(self):
        """Test an unknown model name"""
        with pytest.raises(ValidationError):
            build_model('gaussian', 10)

    def test_setup_steps_timed(self, mocker):
        """Test kernel construction and calibration are timed separately"""
        timer = mocker.MagicMock()
        build_model('ginibre', 9, expected_card=2.0, timer=timer)
        names = [call.args[0] for call in timer.step.call_args_list]
        assert names == ['setup_kernel', 'setup_calibration']

    def test_ensemble_scaling(self):
        """Test LEnsemble.scaled records alpha"""
        scaled = LEnsemble(matrix=np.eye(2), provenance={'tag': 'x'}).scaled(2.0)
        np.testing.assert_allclose(scaled.matrix, 2.0 * np.eye(2))
        assert scaled.provenance == {'tag': 'x', 'alpha': 2.0}
