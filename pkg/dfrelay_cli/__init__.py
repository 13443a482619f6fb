"""
dfrelay_cli package initialization.

Command line front-end: `python -m dfrelay_cli {mode} [options]`.
"""

from .launcher import DfrelayAppLauncher, build_parser, cli_main

__all__ = ["DfrelayAppLauncher", "build_parser", "cli_main"]
