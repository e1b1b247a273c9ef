# Models package
from .matrix import CholeskyFactor, EigenDecomposition
from .kernel import KernelMatrix, LEnsemble, CalibrationResult, KernelReport
from .sample import SampleSet, BernoulliEnvelope, ThinningState
from .image import GrayImage, PatchSet
from .distribution import SubsetDistribution, ChiSquareResult
from .bench import BenchRecord

__all__ = [
    'CholeskyFactor', 'EigenDecomposition', 'KernelMatrix', 'LEnsemble', 'CalibrationResult',
    'KernelReport', 'SampleSet', 'BernoulliEnvelope', 'ThinningState', 'GrayImage', 'PatchSet',
    'SubsetDistribution', 'ChiSquareResult', 'BenchRecord',
]
