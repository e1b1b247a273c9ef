import math

import click

from dpp.commands.common import kernel_options, resolve_kernel, seed_option
from dpp.services.kernels import expected_cardinality
from dpp.services.samplers import ORDERS, bernoulli_envelope, envelope_bound
from dpp.utils.validators import handle_errors


@click.command('envelope')
@kernel_options
@click.option('--order', type=click.Choice(ORDERS), default='natural', show_default=True)
@seed_option('Seed for the kernel model')
@click.option('--show-q', is_flag=True, help='Also print q_1..q_N')
@handle_errors
def envelope(kernel_source, n, expected_card, rank, kernel_seed, image, patch_size, bandwidth_mult,
             order, seed, show_q):
    """Print the Bernoulli envelope of a kernel against E|Y| and the |X| bound"""
    built = resolve_kernel(kernel_source, n, expected_card, rank,
                           seed if kernel_seed is None else kernel_seed,
                           image, patch_size, bandwidth_mult)
    result = bernoulli_envelope(built.kernel, order=order)
    bound = envelope_bound(built.kernel)

    click.echo(f'n={result.n}')
    click.echo(f'trace={expected_cardinality(built.kernel):.10g}')
    click.echo(f'sum_q={result.expected_size:.10g}')
    click.echo(f'bound={"inf" if math.isinf(bound) else f"{bound:.10g}"}')
    click.echo(f'degenerate_from={result.degenerate_from if result.degenerate_from else "none"}')
    if show_q:
        click.echo('q=' + ','.join(f'{value:.10g}' for value in result.q))
