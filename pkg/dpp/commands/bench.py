import logging

import click

from dpp.commands.common import CommaList, seed_option
from dpp.services.benchmark import parse_card_mode, run_bench, write_bench_csv
from dpp.services.factory import MODELS
from dpp.services.patches import load_pgm
from dpp.services.samplers import SAMPLERS
from dpp.utils.validators import handle_errors

logger = logging.getLogger(__name__)

DEFAULT_ALGOS = 'spectral,thinning,sequential'


@click.command('bench')
@click.option('--models', type=CommaList(choices=MODELS), default='random,ginibre', show_default=True)
@click.option('--sizes', type=CommaList(int), default='100', show_default=True)
@click.option('--card-mode', 'card_modes', multiple=True, default=('proportional:0.04',),
              show_default=True, help='proportional:p or constant:c[,c2,...] (repeatable)')
@click.option('--algos', type=CommaList(choices=sorted(SAMPLERS)), default=DEFAULT_ALGOS, show_default=True)
@click.option('--reps', type=click.IntRange(min=1), default=5, show_default=True)
@seed_option()
@click.option('--image', type=click.Path(exists=True, dir_okay=False),
              help='PGM image for the patch model (bundled texture by default)')
@click.option('--max-n', type=click.IntRange(min=1), help='Size cap (DPP_BENCH_MAX_N by default)')
@click.option('--out', type=click.Path(dir_okay=False), help='Write the CSV here instead of stdout')
@handle_errors
def bench(models, sizes, card_modes, algos, reps, seed, image, max_n, out):
    """Time the samplers step by step and emit a versioned CSV"""
    modes = [mode for text in card_modes for mode in parse_card_mode(text)]
    picture = load_pgm(image) if image else None

    def progress(record):
        logger.debug(f'{record.model} n={record.n} {record.algo} rep={record.rep}: {record.total_ms:.2f} ms')

    records = run_bench(models, sizes, modes, algos, reps=reps, seed=seed, image=picture,
                        max_n=max_n, on_record=progress)
    if out:
        with open(out, 'w', newline='') as f:
            write_bench_csv(records, f)
        click.echo(f'Wrote {len(records)} records to {out}')
    else:
        write_bench_csv(records, click.get_text_stream('stdout'))
