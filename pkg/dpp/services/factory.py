"""
Builds any of the four kernel models by name, with optional calibration to a
target expected cardinality.
"""
import logging
from dataclasses import dataclass
from typing import Optional

from dpp.models.kernel import CalibrationResult, KernelMatrix
from dpp.services.kernels import (
    build_ginibre, build_patch_gaussian, build_projection, build_random,
    calibrated_kernel, k_from_l, l_from_k
)
from dpp.utils.errors import ValidationError
from dpp.utils.timing import NULL_TIMER

logger = logging.getLogger(__name__)

MODELS = ('random', 'ginibre', 'patch', 'projection')


@dataclass
class BuiltModel:
    kernel: KernelMatrix
    calibration: Optional[CalibrationResult] = None


def _patch_ensemble(n: int, seed: int, image, patch_size: int, bandwidth_mult: float):
    # late import: the patch service itself imports the samplers
    from dpp.services.patches import extract_patches, median_bandwidth

    if image is None:
        raise ValidationError('the patch model needs an image')
    patches = extract_patches(image, patch_size, n, seed)
    bandwidth = median_bandwidth(patches, seed=seed, c=bandwidth_mult)
    return build_patch_gaussian(patches, bandwidth)


def build_model(model: str, n: int, seed: int = 0, expected_card: float = None,
                rank: int = None, image=None, patch_size: int = 8,
                bandwidth_mult: float = 1.0, timer=NULL_TIMER) -> BuiltModel:
    """Kernel of `model` on n points.

    random, ginibre and patch go through their L-ensemble and are calibrated
    when `expected_card` is given; projection takes its rank from `rank` (or
    from `expected_card`, which a projection kernel reproduces exactly).
    Kernel construction and calibration are timed as `setup_kernel` and
    `setup_calibration`.
    """
    if model not in MODELS:
        raise ValidationError(f'unknown kernel model {model!r}; expected one of {MODELS}')

    if model == 'projection':
        if rank is not None and expected_card is not None:
            raise ValidationError('give either rank or expected cardinality for a projection kernel')
        if rank is None:
            if expected_card is None or float(expected_card) != int(expected_card):
                raise ValidationError('a projection kernel needs an integer rank')
            rank = int(expected_card)
        with timer.step('setup_kernel'):
            kernel = build_projection(n, rank, seed)
        return BuiltModel(kernel=kernel)

    if rank is not None:
        raise ValidationError(f'rank only applies to the projection model, not {model!r}')

    with timer.step('setup_kernel'):
        if model == 'random':
            kernel = build_random(n, seed)
            ensemble = l_from_k(kernel) if expected_card is not None else None
        elif model == 'ginibre':
            ensemble = build_ginibre(n, seed)
        else:
            ensemble = _patch_ensemble(n, seed, image, patch_size, bandwidth_mult)

    if expected_card is None:
        if model != 'random':
            with timer.step('setup_kernel'):
                kernel = k_from_l(ensemble)
        return BuiltModel(kernel=kernel)

    with timer.step('setup_calibration'):
        kernel, calibration = calibrated_kernel(ensemble, expected_card)
    logger.info(f'Built {model} kernel n={n} with E|Y|={calibration.achieved_expected_cardinality:.6g}')
    return BuiltModel(kernel=kernel, calibration=calibration)
