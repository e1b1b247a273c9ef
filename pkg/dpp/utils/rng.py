"""Seeded random streams.

Every sampler invocation owns one generator built from its 64-bit seed, so a
(kernel, seed) pair reproduces the same draw on any platform with the same
floating-point semantics. Batches of draws get their seeds from a parent seed
through SeedSequence, one child per invocation.
"""
import numpy as np

from dpp.utils.errors import ValidationError

MAX_SEED = 2 ** 64 - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if seed < 0 or seed > MAX_SEED:
        raise ValidationError(f'seed must be an unsigned 64-bit integer, got {seed}')
    return seed


def make_rng(seed) -> np.random.Generator:
    """Generator for a single sampler invocation"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(check_seed(seed))))


def derive_seeds(seed, count: int) -> list:
    """`count` independent 64-bit seeds split off `seed`"""
    if count <= 0:
        return []
    state = np.random.SeedSequence(check_seed(seed)).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def stream_seed(seed, *key: int) -> int:
    """Seed of the substream of `seed` addressed by the integer path `key`"""
    sequence = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
