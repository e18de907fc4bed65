"""Spectral Klein-Gordon-Poisson and quantum hydrodynamics solvers.

Fields are numpy arrays in the grid's shape; vector fields carry a leading
component axis. Library failures raise RqlabError with `kind` (the error name
used by the command line tool) and `exit_code`.
"""

import json
from pathlib import Path

from ._rqlab import (
    Grid,
    Params,
    RqlabError,
    __version__,
    charge,
    dealias,
    dispersion_omega,
    fit_order,
    gradient,
    kg_from_hydro,
    kg_solve,
    kg_to_hydro,
    laplacian,
    plane_wave,
    sha256_hex,
    sobolev_norm,
    solve_poisson,
    stability_bound,
    validate_config_text,
)
from . import _rqlab


def run_config(config, outdir):
    """Run one experiment config, write its artifacts into `outdir` and return the summary."""
    return json.loads(_rqlab.run_config(Path(config), Path(outdir)))


def report(run_dir):
    """Manifest and headline results of a finished run directory."""
    return json.loads(_rqlab.report_json(Path(run_dir)))


__all__ = [
    "Grid",
    "Params",
    "RqlabError",
    "__version__",
    "charge",
    "dealias",
    "dispersion_omega",
    "fit_order",
    "gradient",
    "kg_from_hydro",
    "kg_solve",
    "kg_to_hydro",
    "laplacian",
    "plane_wave",
    "report",
    "run_config",
    "sha256_hex",
    "sobolev_norm",
    "solve_poisson",
    "stability_bound",
    "validate_config_text",
]
