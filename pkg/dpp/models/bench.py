from dataclasses import dataclass, field
from typing import Dict, List

CSV_VERSION_HEADER = '# dpp-bench v1'
CSV_COLUMNS = ['model', 'algo', 'n', 'target_card', 'rep', 'seed', 'step', 'wall_ms', 'sample_card']
TOTAL_STEP = 'total'

STEPS = {
    'spectral': ('eigendecomposition', 'frequency_selection', 'sequential_draw'),
    'thinning': ('envelope_preprocess', 'bernoulli_draw', 'sequential_thinning'),
    'sequential': ('sequential_sampling',),
}


@dataclass
class BenchRecord:
    """Timings of one (model, n, target, algo, rep) run; all times in ms"""
    model: str
    algo: str
    n: int
    target_card: float
    rep: int
    seed: int
    steps: Dict[str, float]
    total_ms: float
    sample_card: int
    setup: Dict[str, float] = field(default_factory=dict)

    def step_sum(self) -> float:
        return sum(self.steps.values())

    def to_rows(self) -> List[dict]:
        """One CSV row per setup step, algorithm step and the total"""
        common = {
            'model': self.model, 'algo': self.algo, 'n': self.n,
            'target_card': self.target_card, 'rep': self.rep, 'seed': self.seed,
            'sample_card': self.sample_card,
        }
        rows = []
        for name, ms in list(self.setup.items()) + list(self.steps.items()):
            rows.append(dict(common, step=name, wall_ms=round(ms, 4)))
        rows.append(dict(common, step=TOTAL_STEP, wall_ms=round(self.total_ms, 4)))
        return rows
