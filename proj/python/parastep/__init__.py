"""Python access to the parastep solver and convergence harness."""

import json

from ._parastep import (
    ParastepError,
    cli,
    exact_solution,
    exact_solution_ids,
    fit_rate,
    pucci_minus,
    pucci_plus,
)
from ._parastep import _converge_json, _solve

__all__ = [
    "ParastepError",
    "cli",
    "converge",
    "exact_solution",
    "exact_solution_ids",
    "fit_rate",
    "pucci_minus",
    "pucci_plus",
    "solve",
]


def converge(config="", h_list=(), seed=202, threads=1):
    """Run a convergence study. Returns a dict with rows, fitted_rate and csv."""
    return json.loads(_converge_json(str(config), list(h_list), seed, threads))


def solve(config="", h=0.0):
    """Solve on one mesh (finest h of the config by default).

    Returns (values, info) with values shaped (time levels, nodes per axis...).
    """
    return _solve(str(config), h)
