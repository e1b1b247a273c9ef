#!/usr/bin/env python3
"""
Main entry point for the dpp command-line tool.
"""
import logging
import sys

import click

from dpp import __version__
from dpp.config import settings


def create_cli():
    """CLI factory: configures logging and registers every command"""
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )

    @click.group(context_settings={'auto_envvar_prefix': 'DPP', 'help_option_names': ['-h', '--help']})
    @click.version_option(version=__version__, prog_name='dpp')
    def cli():
        """Exact sampling of discrete determinantal point processes"""

    # Register commands
    from dpp.commands.sample import sample
    from dpp.commands.validate import validate
    from dpp.commands.bench import bench
    from dpp.commands.patches import patches
    from dpp.commands.kernel import kernel
    from dpp.commands.envelope import envelope

    for command in (sample, validate, bench, patches, kernel, envelope):
        cli.add_command(command)
    return cli


def main():
    cli = create_cli()
    return cli(prog_name='dpp')


if __name__ == '__main__':
    main()
