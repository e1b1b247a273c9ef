from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SubsetDistribution:
    """Probabilities over the 2^n subsets of {1..n}.

    Entry `mask` is the probability of the subset whose element i + 1 is
    present exactly when bit i of `mask` is set.
    """
    n: int
    probabilities: np.ndarray

    def probability_of(self, subset) -> float:
        mask = 0
        for index in subset:
            mask |= 1 << (int(index) - 1)
        return float(self.probabilities[mask])

    def to_csv(self) -> str:
        lines = ['bitmask,probability']
        lines.extend(f'{mask},{p!r}' for mask, p in enumerate(self.probabilities.tolist()))
        return '\n'.join(lines) + '\n'

    def __repr__(self):
        return f'<SubsetDistribution n={self.n}>'


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float
    pooled_cells: int = 0

    def rejects(self, level: float) -> bool:
        return self.p_value < level
