import logging

import click

from dpp.commands.common import CommaList, seed_option
from dpp.config import TEXTURE_IMAGE
from dpp.services.patches import (
    DEFAULT_CARDS, DEFAULT_PATCH_COUNT, DEFAULT_PATCH_SIZE, STRATEGIES, load_pgm, mean_mse,
    run_patch_experiment
)
from dpp.utils.validators import handle_errors

logger = logging.getLogger(__name__)


@click.command('patches')
@click.option('--image', type=click.Path(exists=True, dir_okay=False),
              help='Grayscale PGM (bundled 128x128 texture by default)')
@click.option('--patch-size', type=click.IntRange(min=1), default=DEFAULT_PATCH_SIZE, show_default=True)
@click.option('--patch-count', type=click.IntRange(min=2), default=DEFAULT_PATCH_COUNT, show_default=True)
@click.option('--cards', type=CommaList(int), default=','.join(str(c) for c in DEFAULT_CARDS),
              show_default=True)
@click.option('--bandwidth-mult', type=float, default=1.0, show_default=True)
@click.option('--seeds', type=click.IntRange(min=1), default=20, show_default=True,
              help='Number of seeds per cardinality')
@seed_option('First seed; patch extraction uses it too')
@click.option('--out-dir', type=click.Path(file_okay=False), required=True)
@handle_errors
def patches(image, patch_size, patch_count, cards, bandwidth_mult, seeds, seed, out_dir):
    """Compare DPP and uniform patch selections by reconstruction error"""
    picture = load_pgm(image or TEXTURE_IMAGE)
    rows = run_patch_experiment(picture, patch_size=patch_size, patch_count=patch_count,
                                cards=cards, bandwidth_mult=bandwidth_mult, seeds=seeds,
                                base_seed=seed, out_dir=out_dir)
    for card in cards:
        means = ' '.join(f'{s}={mean_mse(rows, s, card):.6g}' for s in STRATEGIES)
        click.echo(f'card={card} mean_mse {means}')
