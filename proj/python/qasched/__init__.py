"""Python front end for the qasched C++ core."""

import json

from . import _core
from ._core import (
    IoError,
    NumericalFailure,
    ResourceLimit,
    UnsupportedSize,
    embed_stats_csv,
    gap_percent,
    render_grid,
    tts,
)


def generate_instance(n, seed):
    return json.loads(_core.generate_instance(n, seed))


def build_qubo(instance, penalty=None):
    coeffs, offset, lam = _core.build_qubo(json.dumps(instance), penalty)
    return {"coeffs": coeffs, "offset": offset, "penalty": lam}


def qubo_energy(instance, x):
    return _core.qubo_energy(json.dumps(instance), list(x))


def exact_solve(instance):
    tour, length = _core.exact_solve(json.dumps(instance))
    return list(tour), length


def default_config(profile="paper"):
    text = _core.desk_config() if profile == "desk" else _core.default_config()
    return json.loads(text)


def run_experiment(config, output_dir=None):
    reports, summary_csv, files = _core.run_experiment(json.dumps(config), str(output_dir or ""))
    return {"reports": [json.loads(r) for r in reports], "summary_csv": summary_csv, "files": list(files)}


def cli(*args):
    """Runs the command-line tool in-process; returns (code, stdout, stderr)."""
    return _core.cli_main([str(a) for a in args])
