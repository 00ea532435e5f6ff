"""Intermittent interval maps, transfer operators and global-local mixing."""

import json as _json

from ._glomix import *  # noqa: F401,F403
from ._glomix import run as _run

__version__ = "0.1.0"


def run(command, output_dir, **config):
    """Run a CLI command in-process; returns (exit_status, log, errors).

    Keyword arguments mirror the manifest's "config" entries (map_path, grid,
    measure, F, g, n, seed, ...).
    """
    config = dict(config, command=command, output_dir=str(output_dir))
    return _run(_json.dumps(config))
