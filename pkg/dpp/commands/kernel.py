import logging

import click

from dpp.commands.common import kernel_options, resolve_kernel, seed_option
from dpp.services.kernels import expected_cardinality
from dpp.utils.validators import handle_errors

logger = logging.getLogger(__name__)


@click.command('kernel')
@kernel_options
@seed_option('Seed for the kernel model')
@click.option('--out', type=click.Path(dir_okay=False), required=True)
@handle_errors
def kernel(kernel_source, n, expected_card, rank, kernel_seed, image, patch_size, bandwidth_mult,
           seed, out):
    """Build a kernel model and write it in the matrix text format"""
    built = resolve_kernel(kernel_source, n, expected_card, rank,
                           seed if kernel_seed is None else kernel_seed,
                           image, patch_size, bandwidth_mult)
    built.kernel.save(out)
    click.echo(f'n={built.kernel.n} tag={built.kernel.tag} '
               f'trace={expected_cardinality(built.kernel):.10g}')
    if built.calibration is not None:
        click.echo(f'alpha={built.calibration.alpha:.10g} '
                   f'iterations={built.calibration.iterations}')
