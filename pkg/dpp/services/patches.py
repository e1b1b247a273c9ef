"""
Patch selection experiment: extract w x w patches from a grayscale image,
select a few of them with a DPP or uniformly, and rebuild the image from the
selection only.
"""
import csv
import logging
import os
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Union

import cv2
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial.distance import cdist, pdist

from dpp.models.image import GrayImage, PatchSet
from dpp.models.sample import SampleSet
from dpp.services.kernels import (
    build_patch_gaussian, calibrated_kernel, numerical_rank
)
from dpp.services.numerics import herm_eigenvalues
from dpp.services.samplers import bernoulli_envelope, sample_thinning
from dpp.utils.errors import ImageFormatError, ValidationError, ZeroBandwidthError
from dpp.utils.rng import derive_seeds, make_rng
from dpp.utils.validators import validate_positive

logger = logging.getLogger(__name__)

PAIR_BUDGET = 10000
DEFAULT_PATCH_SIZE = 8
DEFAULT_PATCH_COUNT = 1000
DEFAULT_CARDS = (5, 25, 100)
MAX_REDRAWS = 100
RANK_FRACTION = 0.99
REPORT_COLUMNS = ['strategy', 'seed', 'target_card', 'actual_card', 'mse']
STRATEGIES = ('dpp', 'uniform')

PGM_SUFFIXES = ('.pgm',)


def load_pgm(path) -> GrayImage:
    """Read an 8-bit grayscale PGM, binary (P5) or ASCII (P2)"""
    path = os.fspath(path)
    if not path.lower().endswith(PGM_SUFFIXES):
        raise ImageFormatError(f'{path}: expected a .pgm file')
    try:
        values = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    except cv2.error as e:
        raise ImageFormatError(f'{path}: {e}') from e
    if values is None:
        raise ImageFormatError(f'{path}: unreadable or truncated PGM')
    if values.ndim != 2:
        raise ImageFormatError(f'{path}: expected one channel, got {values.shape[2]}')
    if values.dtype != np.uint8:
        raise ImageFormatError(f'{path}: only 8-bit images are supported, got {values.dtype}')

    logger.debug(f'Loaded {values.shape[1]}x{values.shape[0]} image from {path}')
    return GrayImage.from_uint8(values)


def save_pgm(image: GrayImage, path, binary: bool = True) -> None:
    """Write an 8-bit PGM (P5 by default, P2 with binary=False)"""
    path = os.fspath(path)
    try:
        written = cv2.imwrite(path, image.to_uint8(), [cv2.IMWRITE_PXM_BINARY, int(binary)])
    except cv2.error as e:
        raise ImageFormatError(f'{path}: {e}') from e
    if not written:
        raise ImageFormatError(f'{path}: could not write PGM')


def extract_patches(image: GrayImage, w: int, count: int, seed: int) -> PatchSet:
    """`count` distinct w x w patches at uniformly drawn top-left corners"""
    w = int(w)
    if w < 1 or w > min(image.width, image.height):
        raise ValidationError(
            f'patch size {w} does not fit a {image.width}x{image.height} image'
        )
    windows = sliding_window_view(image.pixels, (w, w))
    rows, cols = windows.shape[:2]
    available = rows * cols
    if count < 1 or count > available:
        raise ValidationError(f'patch count must be in 1..{available}, got {count}')

    picked = make_rng(seed).choice(available, size=count, replace=False)
    positions = np.column_stack(np.divmod(picked, cols)).astype(np.int64)
    vectors = windows[positions[:, 0], positions[:, 1]].reshape(count, w * w)
    return PatchSet(w=w, positions=positions, vectors=np.ascontiguousarray(vectors))


def _pair_from_condensed(k: np.ndarray, m: int):
    """(i, j), i < j, of condensed pair index k among m items"""
    i = m - 2 - np.floor(np.sqrt(-8 * k + 4 * m * (m - 1) - 7) / 2.0 - 0.5).astype(np.int64)
    j = k + i + 1 - m * (m - 1) // 2 + (m - i) * ((m - i) - 1) // 2
    return i, j


def median_bandwidth(patches, pair_budget: int = PAIR_BUDGET, seed: int = 0, c: float = 1.0) -> float:
    """c times the median Euclidean distance over up to `pair_budget` random pairs"""
    c = validate_positive(c, 'bandwidth multiplier')
    vectors = patches.vectors if isinstance(patches, PatchSet) else np.asarray(patches, dtype=np.float64)
    m = vectors.shape[0]
    if m < 2:
        raise ValidationError(f'median bandwidth needs at least 2 patches, got {m}')

    total = m * (m - 1) // 2
    if total <= pair_budget:
        distances = pdist(vectors)
    else:
        k = make_rng(seed).choice(total, size=pair_budget, replace=False).astype(np.int64)
        i, j = _pair_from_condensed(k, m)
        distances = np.linalg.norm(vectors[i] - vectors[j], axis=1)

    median = float(np.median(distances))
    if median <= 0.0:
        raise ZeroBandwidthError('median patch distance is zero; patches are identical')
    return c * median


def _anchors(length: int, w: int) -> List[int]:
    anchors = list(range(0, length - w + 1, w))
    if anchors[-1] != length - w:
        anchors.append(length - w)
    return anchors


def _selected_positions(selected, count: int) -> np.ndarray:
    if isinstance(selected, SampleSet):
        positions = selected.positions
    else:
        positions = np.asarray(list(selected), dtype=np.int64) - 1
    if positions.size == 0:
        raise ValidationError('cannot reconstruct from an empty selection')
    if positions.min() < 0 or positions.max() >= count:
        raise ValidationError(f'selected indices must lie in 1..{count}')
    return positions


def reconstruct(image: GrayImage, patches: PatchSet, selected: Union[SampleSet, Iterable[int]],
                w: int = None):
    """Replace every block of a stride-w tiling by its nearest selected patch.

    The last row and column of blocks sit flush against the border, so their
    overlap with the previous blocks is averaged. Returns (image, mse).
    """
    w = patches.w if w is None else int(w)
    if w != patches.w:
        raise ValidationError(f'block size {w} differs from patch size {patches.w}')
    if w > min(image.width, image.height):
        raise ValidationError(f'patch size {w} does not fit a {image.width}x{image.height} image')
    chosen = patches.vectors[_selected_positions(selected, len(patches))]

    pixels = image.pixels
    total = np.zeros_like(pixels)
    weight = np.zeros_like(pixels)
    rows, cols = _anchors(image.height, w), _anchors(image.width, w)
    blocks = np.array([pixels[r:r + w, c:c + w].ravel() for r in rows for c in cols])
    nearest = np.argmin(cdist(blocks, chosen, 'sqeuclidean'), axis=1)

    for index, (r, c) in enumerate((r, c) for r in rows for c in cols):
        total[r:r + w, c:c + w] += chosen[nearest[index]].reshape(w, w)
        weight[r:r + w, c:c + w] += 1.0

    rebuilt = np.clip(total / weight, 0.0, 1.0)
    mse = float(np.mean((rebuilt - pixels) ** 2))
    return GrayImage(pixels=rebuilt), mse


def select_uniform(patches, k: int, seed: int) -> SampleSet:
    """k distinct patch indices drawn uniformly"""
    count = len(patches) if isinstance(patches, PatchSet) else int(patches)
    k = int(k)
    if k < 0 or k > count:
        raise ValidationError(f'cannot select {k} of {count} patches')
    picked = make_rng(seed).choice(count, size=k, replace=False)
    return SampleSet.from_positions(picked, seed, 'uniform')


class PatchSelector:
    """DPP selection over one patch set: the Gaussian L-ensemble is built and
    diagonalized once, then calibrated per target cardinality."""

    def __init__(self, patches: PatchSet, bandwidth_mult: float = 1.0, seed: int = 0):
        self.patches = patches
        try:
            self.bandwidth = median_bandwidth(patches, seed=seed, c=bandwidth_mult)
        except ZeroBandwidthError:
            # identical patches give the all-ones L for every bandwidth
            logger.warning('All patches are identical; using bandwidth 1')
            self.bandwidth = 1.0
        self.ensemble = build_patch_gaussian(patches, self.bandwidth)
        self.eigenvalues = herm_eigenvalues(self.ensemble.matrix, check=False)
        self.rank = numerical_rank(self.eigenvalues)
        self._models = {}

    def model(self, target: float):
        """(kernel, envelope) calibrated to E|Y| = target, cached per target"""
        if target not in self._models:
            reachable = target
            if target >= self.rank:
                reachable = RANK_FRACTION * self.rank
                logger.warning(f'Target {target} is not below the patch kernel rank {self.rank}; '
                               f'using {reachable:.4g}')
            kernel, _ = calibrated_kernel(
                self.ensemble, reachable, eigenvalues=self.eigenvalues
            )
            self._models[target] = (kernel, bernoulli_envelope(kernel))
        return self._models[target]

    def select(self, target: float, seed: int) -> SampleSet:
        """Thinning draw; empty draws are redrawn from seeds derived from `seed`"""
        kernel, envelope = self.model(target)
        candidates = [seed] + derive_seeds(seed, MAX_REDRAWS)
        for attempt in candidates:
            selection = sample_thinning(kernel, envelope, attempt)
            if len(selection):
                if attempt != seed:
                    logger.warning(f'Empty DPP selection for seed {seed}; redrawn with seed {attempt}')
                return selection
        raise ValidationError(f'DPP selection stayed empty for {MAX_REDRAWS} redraws of seed {seed}')


@dataclass
class PatchReportRow:
    strategy: str
    seed: int
    target_card: float
    actual_card: int
    mse: float

    def to_dict(self):
        return {
            'strategy': self.strategy,
            'seed': self.seed,
            'target_card': self.target_card,
            'actual_card': self.actual_card,
            'mse': repr(self.mse),
        }


def write_report(rows: Sequence[PatchReportRow], path) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.to_dict())


def run_patch_experiment(image: GrayImage, patch_size: int = DEFAULT_PATCH_SIZE,
                         patch_count: int = DEFAULT_PATCH_COUNT,
                         cards: Sequence[int] = DEFAULT_CARDS, bandwidth_mult: float = 1.0,
                         seeds: int = 20, base_seed: int = 0, out_dir=None) -> List[PatchReportRow]:
    """Reconstruct `image` from DPP and uniform selections for every (card, seed).

    Seeds are base_seed .. base_seed + seeds - 1. With `out_dir`, writes one
    PGM per (strategy, card, seed) and report.csv.
    """
    if seeds < 1:
        raise ValidationError(f'seeds must be at least 1, got {seeds}')
    patches = extract_patches(image, patch_size, patch_count, base_seed)
    selector = PatchSelector(patches, bandwidth_mult=bandwidth_mult, seed=base_seed)
    logger.info(f'Patch kernel: {len(patches)} patches, bandwidth {selector.bandwidth:.4g}, '
                f'rank {selector.rank}')
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    rows = []
    for card in cards:
        for seed in range(base_seed, base_seed + seeds):
            selections = {
                'dpp': selector.select(card, seed),
                'uniform': select_uniform(patches, card, seed),
            }
            for strategy in STRATEGIES:
                selection = selections[strategy]
                rebuilt, mse = reconstruct(image, patches, selection)
                rows.append(PatchReportRow(strategy=strategy, seed=selection.seed,
                                           target_card=card, actual_card=len(selection), mse=mse))
                if out_dir is not None:
                    name = f'{strategy}_card{card}_seed{selection.seed}.pgm'
                    save_pgm(rebuilt, os.path.join(out_dir, name))
        logger.info(f'Finished cardinality {card} over {seeds} seeds')

    if out_dir is not None:
        write_report(rows, os.path.join(out_dir, 'report.csv'))
    return rows


def mean_mse(rows: Sequence[PatchReportRow], strategy: str, card=None) -> float:
    values = [r.mse for r in rows if r.strategy == strategy and (card is None or r.target_card == card)]
    if not values:
        raise ValidationError(f'no report rows for strategy {strategy!r}')
    return float(np.mean(values))
