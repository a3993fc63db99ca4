"""
The `staintk.cli` package implements the `staintk` command line.

Each subcommand reads its inputs, writes its outputs into the `--output` directory, prints a human-readable
summary to stdout, and returns an exit code. Errors are reported to stderr as a JSON object
with the `error` type, the `message`, and the `exit_code`.
"""

from ._main import main, build_parser, exit_code_of
from ._commands import EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NUMERIC, GRADCHECK_TOLERANCE

__all__ = [
    'main', 'build_parser', 'exit_code_of',
    'EXIT_OK', 'EXIT_IO', 'EXIT_INVALID', 'EXIT_NUMERIC', 'GRADCHECK_TOLERANCE',
]
