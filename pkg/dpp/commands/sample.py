import logging

import click

from dpp.commands.common import kernel_options, resolve_kernel, seed_option
from dpp.services.samplers import ORDERS, SAMPLERS, bernoulli_envelope, draw
from dpp.utils.validators import handle_errors

logger = logging.getLogger(__name__)


@click.command('sample')
@kernel_options
@click.option('--algo', type=click.Choice(sorted(SAMPLERS)), default='thinning', show_default=True)
@click.option('--order', type=click.Choice(ORDERS), default='natural', show_default=True,
              help='Visiting order of the thinning envelope')
@seed_option()
@click.option('--out', type=click.Path(dir_okay=False), help='Write the sample here instead of stdout')
@handle_errors
def sample(kernel_source, n, expected_card, rank, kernel_seed, image, patch_size, bandwidth_mult,
           algo, order, seed, out):
    """Draw one exact DPP sample"""
    built = resolve_kernel(kernel_source, n, expected_card, rank,
                           seed if kernel_seed is None else kernel_seed,
                           image, patch_size, bandwidth_mult)
    envelope = None
    if algo == 'thinning':
        envelope = bernoulli_envelope(built.kernel, order=order)
    result = draw(algo, built.kernel, seed, envelope=envelope)
    logger.info(f'Sampled {len(result)} points with {algo} (seed={seed})')

    if out:
        with open(out, 'w') as f:
            f.write(result.to_text())
    else:
        click.echo(result.to_text(), nl=False)
