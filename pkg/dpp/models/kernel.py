import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from dpp.utils.matrix_io import read_matrix, write_matrix

PROVENANCE_PREFIX = 'provenance '


def _provenance_comment(provenance: dict) -> str:
    return PROVENANCE_PREFIX + json.dumps(provenance, sort_keys=True)


def _provenance_from_comments(comments: List[str], path) -> dict:
    for comment in comments:
        if comment.startswith(PROVENANCE_PREFIX):
            try:
                return json.loads(comment[len(PROVENANCE_PREFIX):])
            except json.JSONDecodeError:
                break
    return {'tag': 'file', 'path': str(path)}


@dataclass(frozen=True)
class KernelMatrix:
    """Marginal kernel K of a DPP: Hermitian, spectrum in [0, 1]"""
    matrix: np.ndarray
    provenance: dict = field(default_factory=lambda: {'tag': 'file'})

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def tag(self) -> str:
        return self.provenance.get('tag', 'file')

    def save(self, path) -> None:
        write_matrix(path, self.matrix, comments=[_provenance_comment(self.provenance)])

    @classmethod
    def load(cls, path) -> 'KernelMatrix':
        matrix, comments = read_matrix(path)
        provenance = dict(_provenance_from_comments(comments, path))
        provenance.setdefault('tag', 'file')
        return cls(matrix=matrix, provenance=provenance)

    def __repr__(self):
        return f'<KernelMatrix n={self.n} tag={self.tag}>'


@dataclass(frozen=True)
class LEnsemble:
    """Hermitian PSD L with K = L (I + L)^-1"""
    matrix: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def scaled(self, alpha: float) -> 'LEnsemble':
        provenance = dict(self.provenance, alpha=float(alpha))
        return LEnsemble(matrix=alpha * self.matrix, provenance=provenance)

    def __repr__(self):
        return f'<LEnsemble n={self.n} tag={self.provenance.get("tag")}>'


@dataclass(frozen=True)
class CalibrationResult:
    alpha: float
    achieved_expected_cardinality: float
    iterations: int
    target: Optional[float] = None

    def to_dict(self):
        return {
            'alpha': self.alpha,
            'achieved_expected_cardinality': self.achieved_expected_cardinality,
            'iterations': self.iterations,
            'target': self.target,
        }


@dataclass
class KernelReport:
    """Outcome of validate_kernel; `violations` is empty when the kernel is valid"""
    violations: List[str] = field(default_factory=list)
    min_eigenvalue: Optional[float] = None
    max_eigenvalue: Optional[float] = None
    method: str = 'eigen'

    @property
    def ok(self) -> bool:
        return not self.violations
