"""Capacity planning with storage: exact and aggregated LPs, storage
valuation, extreme-day selection and a block-decomposed ADMM solver."""

from ._storeplan import *  # noqa: F401,F403
from ._storeplan import StoreplanError, __doc__  # noqa: F401


def load_scenario_file(path):
    """Runs a comparison scenario stored as JSON and returns the report dict."""
    import json
    import os

    with open(path) as fh:
        scenario = json.load(fh)
    return run_comparison(scenario, os.path.dirname(os.path.abspath(path)))  # noqa: F405
