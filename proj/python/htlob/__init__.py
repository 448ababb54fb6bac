"""Heavy-traffic limit order book toolkit.

The compiled core lives in ``htlob._htlob``; this module re-exports it and adds
``run_command`` for the JSON-configured harness commands.
"""

import json as _json
import os as _os

from ._htlob import (  # noqa: F401
    DiffusionParams,
    InvalidInput,
    NumericalError,
    __version__,
    agent_model_params,
    command_names,
    cone_alpha,
    duration_survival,
    duration_survival_drifted,
    duration_tail_index,
    estimate_rho,
    exit_statistics,
    hill_estimator,
    params_from_json,
    prob_up,
    prob_up_arcsin,
    prob_up_arctan,
    replay,
)
from . import _htlob


def generate_flow(spec, horizon, seed):
    """Events from a flow spec dict, as {'time', 'side', 'delta'} lists."""
    return _htlob.generate_flow(_json.dumps(spec), horizon, seed)


def run_command(command, config=None, out=".", seed=None, paths=None, input=None, format="csv", threads=0):
    """Run a harness command; writes its files into `out` and returns the report dict."""
    text = _htlob._run_command(
        command,
        _json.dumps(config or {}),
        _os.fspath(out),
        seed,
        paths,
        None if input is None else _os.fspath(input),
        format,
        threads,
    )
    return _json.loads(text)
