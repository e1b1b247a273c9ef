from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular L with L L* equal to the factored matrix.

    `scale` is the largest diagonal magnitude of the factored matrix; pivot
    tolerances are taken relative to it.
    """
    lower: np.ndarray
    scale: float

    @classmethod
    def empty(cls, dtype=np.float64) -> 'CholeskyFactor':
        return cls(lower=np.zeros((0, 0), dtype=dtype), scale=0.0)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.lower))

    def log_determinant(self) -> float:
        """log det of the factored matrix"""
        if self.dim == 0:
            return 0.0
        return float(2.0 * np.sum(np.log(self.diagonal)))

    def determinant(self) -> float:
        return float(np.exp(self.log_determinant()))

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.conj().T

    def __repr__(self):
        return f'<CholeskyFactor dim={self.dim} scale={self.scale:.3g}>'


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order; column j of `eigenvectors` pairs with eigenvalue j"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        vectors = self.eigenvectors
        return (vectors * self.eigenvalues) @ vectors.conj().T

    def __repr__(self):
        if self.dim == 0:
            return '<EigenDecomposition dim=0>'
        return (f'<EigenDecomposition dim={self.dim} '
                f'range=[{self.eigenvalues[0]:.3g}, {self.eigenvalues[-1]:.3g}]>')
