import logging

import click

from dpp.commands.common import CommaList, seed_option
from dpp.models.kernel import KernelMatrix
from dpp.services.factory import MODELS
from dpp.services.validation import SUITES, run_validation, validate_models
from dpp.utils.validators import EXIT_VALIDATION_FAILED, handle_errors

logger = logging.getLogger(__name__)


@click.command('validate')
@click.option('--max-n', type=click.IntRange(min=1), default=8, show_default=True)
@click.option('--draws', type=click.IntRange(min=1), default=200000, show_default=True)
@seed_option()
@click.option('--models', type=CommaList(choices=MODELS), default=','.join(MODELS), show_default=True)
@click.option('--suite', 'suites', type=click.Choice(list(SUITES)), multiple=True,
              help='Run only this suite (repeatable)')
@click.option('--kernel-file', type=click.Path(exists=True, dir_okay=False),
              help='Validate this kernel instead of the built-in models')
@click.option('--report', type=click.Path(dir_okay=False), help='Write the CSV report here')
@handle_errors
def validate(max_n, draws, seed, models, suites, kernel_file, report):
    """Check the exact and sampled invariants; exit 4 on any failure"""
    if kernel_file:
        outcome = run_validation([KernelMatrix.load(kernel_file)], draws, seed, suites)
    else:
        outcome = validate_models(max_n, draws, seed, suites, models)

    click.echo(outcome.to_text(), nl=False)
    if report:
        with open(report, 'w', newline='') as f:
            f.write(outcome.to_csv())

    if not outcome.passed:
        logger.error(f'{len(outcome.failures)} validation checks failed')
        raise click.exceptions.Exit(EXIT_VALIDATION_FAILED)
