from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from dpp.models.matrix import CholeskyFactor
from dpp.utils.errors import ValidationError


@dataclass(frozen=True)
class SampleSet:
    """One realization of a point process: sorted 1-based indices"""
    indices: Tuple[int, ...]
    seed: int
    algo: str = ''

    def __post_init__(self):
        values = tuple(int(i) for i in self.indices)
        if any(i < 1 for i in values):
            raise ValidationError(f'sample indices must be 1-based, got {values}')
        if any(a >= b for a, b in zip(values, values[1:])):
            raise ValidationError(f'sample indices must be strictly increasing, got {values}')
        object.__setattr__(self, 'indices', values)

    @classmethod
    def from_positions(cls, positions, seed: int, algo: str = '') -> 'SampleSet':
        """Build from 0-based positions in any order"""
        return cls(indices=tuple(sorted(int(p) + 1 for p in positions)), seed=seed, algo=algo)

    @property
    def positions(self) -> np.ndarray:
        return np.array(self.indices, dtype=np.int64) - 1

    def __len__(self):
        return len(self.indices)

    def to_text(self) -> str:
        return (f'seed={self.seed} algo={self.algo}\n'
                + ','.join(str(i) for i in self.indices) + '\n')

    @classmethod
    def from_text(cls, text: str) -> 'SampleSet':
        lines = text.splitlines()
        if not lines:
            raise ValidationError('empty sample text')
        fields = dict(part.split('=', 1) for part in lines[0].split() if '=' in part)
        if 'seed' not in fields:
            raise ValidationError(f'bad sample header: {lines[0]!r}')
        body = lines[1].strip() if len(lines) > 1 else ''
        indices = tuple(int(tok) for tok in body.split(',') if tok.strip())
        return cls(indices=indices, seed=int(fields['seed']), algo=fields.get('algo', ''))

    def __repr__(self):
        return f'<SampleSet {self.algo or "?"} seed={self.seed} {list(self.indices)}>'


@dataclass(frozen=True)
class BernoulliEnvelope:
    """Dominating independent-coin probabilities for sequential thinning.

    `q` and `degenerate_from` refer to the visiting order `order` (0-based
    positions of the original ground set); `degenerate_from` is 1-based in
    that order, or None.
    """
    q: np.ndarray
    degenerate_from: Optional[int] = None
    order: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def expected_size(self) -> float:
        return float(np.sum(self.q))

    def __repr__(self):
        return (f'<BernoulliEnvelope n={self.n} sum_q={self.expected_size:.4g} '
                f'degenerate_from={self.degenerate_from}>')


@dataclass
class ThinningState:
    """Mutable state of one sequential (thinning) pass; never shared"""
    accepted: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    factor_b: CholeskyFactor = None
    # Cholesky of H^B_A; valid only while `excluded` has `h_factor_b_size` entries
    h_factor: Optional[CholeskyFactor] = None
    h_factor_b_size: int = -1

    def __post_init__(self):
        if self.factor_b is None:
            self.factor_b = CholeskyFactor.empty()
