"""
Timing harness: runs every (model, size, cardinality, rep, algorithm)
combination on one thread and records per-step wall times.
"""
import csv
import logging
import sys
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from dpp.config import TEXTURE_IMAGE, settings
from dpp.models.bench import CSV_COLUMNS, CSV_VERSION_HEADER, BenchRecord
from dpp.services.factory import MODELS, build_model
from dpp.services.patches import load_pgm
from dpp.services.samplers import SAMPLERS, draw
from dpp.utils.errors import CapacityError, ValidationError
from dpp.utils.rng import stream_seed
from dpp.utils.timing import StepTimer

logger = logging.getLogger(__name__)

CARD_MODES = ('proportional', 'constant')
WARMUP_REP = -1


@dataclass(frozen=True)
class CardMode:
    """Target expected cardinality: a fraction of n, or a constant"""
    mode: str
    value: float

    def target(self, n: int) -> float:
        if self.mode == 'proportional':
            return self.value * n
        return self.value


def parse_card_mode(text: str) -> List[CardMode]:
    """'proportional:0.04' or 'constant:5,10,20' (several values sweep)"""
    mode, sep, values = text.partition(':')
    mode = mode.strip()
    if not sep or mode not in CARD_MODES:
        raise ValidationError(f'card mode must look like proportional:p or constant:c, got {text!r}')
    try:
        numbers = [float(v) for v in values.split(',') if v.strip()]
    except ValueError as e:
        raise ValidationError(f'bad card mode value in {text!r}') from e
    if not numbers:
        raise ValidationError(f'card mode {text!r} has no value')
    for number in numbers:
        if number <= 0 or (mode == 'proportional' and number >= 1):
            raise ValidationError(f'card mode value {number} out of range in {text!r}')
    return [CardMode(mode, number) for number in numbers]


def _model_arguments(model: str, n: int, target: float) -> dict:
    if model == 'projection':
        return {'rank': min(n, max(1, int(round(target))))}
    return {'expected_card': target}


def run_bench(models: Sequence[str], sizes: Sequence[int], card_modes: Sequence[CardMode],
              algos: Sequence[str], reps: int = 1, seed: int = 0, image=None,
              max_n: int = None, on_record: Callable[[BenchRecord], None] = None) -> List[BenchRecord]:
    """Benchmark records, warm-up repetition excluded.

    Each repetition builds one kernel (seeded from the run's substream) and
    times every algorithm on it; kernel construction and calibration land in
    the record's setup steps, outside the total.
    """
    max_n = settings.bench_max_n if max_n is None else max_n
    for model in models:
        if model not in MODELS:
            raise ValidationError(f'unknown kernel model {model!r}; expected one of {MODELS}')
    for algo in algos:
        if algo not in SAMPLERS:
            raise ValidationError(f'unknown algorithm {algo!r}; expected one of {sorted(SAMPLERS)}')
    too_big = [n for n in sizes if n > max_n]
    if too_big:
        raise CapacityError(f'sizes {too_big} exceed the benchmark cap n <= {max_n}')
    if reps < 1:
        raise ValidationError(f'reps must be at least 1, got {reps}')
    if 'patch' in models and image is None:
        image = load_pgm(TEXTURE_IMAGE)

    records = []
    for m, model in enumerate(models):
        for n in sizes:
            for c, card_mode in enumerate(card_modes):
                target = card_mode.target(n)
                for rep in range(WARMUP_REP, reps):
                    kernel_seed = stream_seed(seed, m, n, c, rep + 1, 0)
                    sample_seed = stream_seed(seed, m, n, c, rep + 1, 1)
                    setup = StepTimer()
                    built = build_model(model, n, kernel_seed, image=image, timer=setup,
                                        **_model_arguments(model, n, target))
                    for algo in algos:
                        timer = StepTimer()
                        start = time.perf_counter()
                        sample = draw(algo, built.kernel, sample_seed, timer=timer)
                        total_ms = (time.perf_counter() - start) * 1000.0
                        if rep == WARMUP_REP:
                            continue
                        record = BenchRecord(
                            model=model, algo=algo, n=n, target_card=target, rep=rep,
                            seed=sample_seed, steps=timer.milliseconds(), total_ms=total_ms,
                            sample_card=len(sample), setup=setup.milliseconds(),
                        )
                        records.append(record)
                        if on_record is not None:
                            on_record(record)
                logger.info(f'Benchmarked {model} n={n} E|Y|={target:g} over {reps} reps')
    return records


def write_bench_csv(records: Sequence[BenchRecord], out=None) -> None:
    """Versioned long-format CSV: one row per step plus the total"""
    stream = out if out is not None else sys.stdout
    stream.write(CSV_VERSION_HEADER + '\n')
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator='\n')
    writer.writeheader()
    for record in records:
        for row in record.to_rows():
            writer.writerow(row)


def read_bench_csv(stream) -> List[dict]:
    lines = [line for line in stream if not line.startswith('#')]
    return list(csv.DictReader(lines))


def median_totals(records: Sequence[BenchRecord]) -> Dict[Tuple, float]:
    """Median total time per (model, n, target_card, algo)"""
    groups = defaultdict(list)
    for record in records:
        groups[(record.model, record.n, record.target_card, record.algo)].append(record.total_ms)
    return {key: float(np.median(values)) for key, values in groups.items()}


def median_step_share(records: Sequence[BenchRecord], algo: str, step: str) -> float:
    """Median fraction of the total spent in `step` across records of `algo`"""
    shares = [r.steps.get(step, 0.0) / r.total_ms for r in records if r.algo == algo and r.total_ms > 0]
    if not shares:
        raise ValidationError(f'no records for algorithm {algo!r}')
    return float(np.median(shares))
