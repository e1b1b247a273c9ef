"""
Options and parameter types shared by the CLI commands.
"""
import logging

import click

from dpp.config import TEXTURE_IMAGE, settings
from dpp.models.kernel import KernelMatrix
from dpp.services.factory import MODELS, BuiltModel, build_model
from dpp.services.kernels import calibrated_kernel, l_from_k
from dpp.services.numerics import validate_kernel
from dpp.services.patches import load_pgm
from dpp.utils.errors import ValidationError
from dpp.utils.rng import MAX_SEED

logger = logging.getLogger(__name__)

FILE_PREFIX = 'file:'


class KernelSource(click.ParamType):
    """A model name, or file:PATH for a kernel in the matrix text format"""
    name = 'kernel'

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        if value.startswith(FILE_PREFIX):
            path = value[len(FILE_PREFIX):]
            if not path:
                self.fail('file: needs a path', param, ctx)
            return 'file', path
        if value not in MODELS:
            self.fail(f'{value!r} is not one of {", ".join(MODELS)} or file:PATH', param, ctx)
        return value, None


class CommaList(click.ParamType):
    """Comma-separated values converted with `item`"""
    name = 'list'

    def __init__(self, item=str, choices=None):
        self.item = item
        self.choices = choices

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return list(value)
        values = []
        for token in str(value).split(','):
            token = token.strip()
            if not token:
                continue
            try:
                converted = self.item(token)
            except ValueError:
                self.fail(f'{token!r} is not a valid {self.item.__name__}', param, ctx)
            if self.choices is not None and converted not in self.choices:
                self.fail(f'{token!r} is not one of {", ".join(self.choices)}', param, ctx)
            values.append(converted)
        if not values:
            self.fail('expected at least one value', param, ctx)
        return values


SEED = click.IntRange(0, MAX_SEED)


def seed_option(help_text='RNG seed'):
    return click.option('--seed', type=SEED, default=lambda: settings.default_seed,
                        show_default='DPP_DEFAULT_SEED or 0', help=help_text)


def kernel_options(f):
    """--kernel plus the model parameters that go with it"""
    options = [
        click.option('--kernel', 'kernel_source', type=KernelSource(), required=True,
                     help='random, ginibre, patch, projection or file:PATH'),
        click.option('--n', type=click.IntRange(min=1), help='Ground set size'),
        click.option('--expected-card', type=float, help='Target expected cardinality'),
        click.option('--rank', type=click.IntRange(min=1), help='Rank of a projection kernel'),
        click.option('--kernel-seed', type=SEED, help='Seed for the kernel model (defaults to --seed)'),
        click.option('--image', type=click.Path(exists=True, dir_okay=False),
                     help='PGM image for the patch model (bundled texture by default)'),
        click.option('--patch-size', type=click.IntRange(min=1), default=8, show_default=True),
        click.option('--bandwidth-mult', type=float, default=1.0, show_default=True),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def resolve_kernel(kernel_source, n, expected_card, rank, kernel_seed, image, patch_size,
                   bandwidth_mult, check: bool = True) -> BuiltModel:
    """Build or load the kernel described by the kernel options"""
    model, path = kernel_source
    if model == 'projection' and rank is not None and expected_card is not None:
        raise click.UsageError('--expected-card and --rank are mutually exclusive')

    if model == 'file':
        if n is not None or rank is not None:
            raise click.UsageError('--n and --rank do not apply to file kernels')
        kernel = KernelMatrix.load(path)
        if check:
            report = validate_kernel(kernel.matrix)
            if not report.ok:
                raise ValidationError(f'{path} is not a DPP kernel: {"; ".join(report.violations)}')
        if expected_card is None:
            return BuiltModel(kernel=kernel)
        ensemble = l_from_k(kernel)
        calibrated, calibration = calibrated_kernel(ensemble, expected_card)
        return BuiltModel(kernel=calibrated, calibration=calibration)

    if n is None:
        raise click.UsageError(f'--n is required for the {model} model')
    picture = None
    if model == 'patch':
        picture = load_pgm(image or TEXTURE_IMAGE)
    return build_model(model, n, seed=kernel_seed, expected_card=expected_card, rank=rank,
                       image=picture, patch_size=patch_size, bandwidth_mult=bandwidth_mult)
