"""
Pytest configuration and fixtures for the dpp sampler tests
"""
import numpy as np
import pytest
from click.testing import CliRunner

from dpp.config import TEXTURE_IMAGE
from dpp.models.image import GrayImage
from dpp.models.kernel import KernelMatrix
from dpp.run import create_cli
from dpp.services.kernels import build_projection, build_random, k_from_l, build_ginibre
from dpp.services.patches import load_pgm


@pytest.fixture(scope='session')
def cli():
    """The click command group, built once per session."""
    return create_cli()


@pytest.fixture(scope='function')
def runner():
    """A test runner for the CLI commands."""
    return CliRunner()


@pytest.fixture
def two_point_kernel():
    """K = [[0.5, 0.25], [0.25, 0.5]]; P(Y = A) = (0.1875, 0.3125, 0.3125, 0.1875)."""
    return np.array([[0.5, 0.25], [0.25, 0.5]])


@pytest.fixture
def diagonal_kernel():
    """Independent points with inclusion probabilities 0.3 and 0.7."""
    return np.diag([0.3, 0.7])


@pytest.fixture
def projection_pair():
    """Rank-one projection kernel on two points."""
    return np.array([[0.5, 0.5], [0.5, 0.5]])


@pytest.fixture
def random_kernel():
    """Seeded random kernel on six points."""
    return build_random(6, seed=11)


@pytest.fixture
def complex_kernel():
    """Ginibre-type kernel on five points (complex Hermitian)."""
    return k_from_l(build_ginibre(5))


@pytest.fixture
def projection_kernel():
    """Rank-3 projection kernel on six points."""
    return build_projection(6, 3, seed=5)


@pytest.fixture(params=['random', 'complex', 'projection'])
def any_kernel(request, random_kernel, complex_kernel, projection_kernel):
    """Each kind of small test kernel in turn."""
    return {
        'random': random_kernel,
        'complex': complex_kernel,
        'projection': projection_kernel,
    }[request.param]


@pytest.fixture(scope='session')
def texture():
    """The bundled 128x128 test texture."""
    return load_pgm(TEXTURE_IMAGE)


@pytest.fixture
def gradient_image():
    """Small 16x16 horizontal gradient."""
    values = np.tile(np.arange(16, dtype=np.float64) * 16.0, (16, 1))
    return GrayImage.from_uint8(values)


@pytest.fixture
def kernel_file(tmp_path, two_point_kernel):
    """The two-point kernel written in the matrix text format."""
    path = tmp_path / 'k.txt'
    KernelMatrix(matrix=two_point_kernel, provenance={'tag': 'two-point'}).save(path)
    return path
