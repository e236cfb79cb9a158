"""Python front end for the fairsched simulator.

Configs are plain dicts with the same layout as the JSON files under configs/.
"""

import json

from . import _core
from ._core import InvalidArgument, compute_u, jain_index

__all__ = ["InvalidArgument", "compute_u", "default_config", "jain_index", "load_config", "normalize", "run", "sweep"]


def default_config():
    return json.loads(_core.default_config())


def load_config(path):
    with open(path) as f:
        return json.load(f)


def normalize(config):
    """Validates `config` and returns it with every default filled in."""
    return json.loads(_core.normalize_config(json.dumps(config)))


def run(config, out=None):
    """Simulates one experiment.

    Returns a dict with "summary", "reports" (one per bound check) and the
    effective "config". When `out` is given the artifact set is written there.
    """
    return json.loads(_core.run(json.dumps(config), "" if out is None else str(out)))


def sweep(config):
    return [json.loads(r) for r in _core.sweep(json.dumps(config))]
