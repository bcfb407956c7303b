"""Python bindings for hypoguard."""

import json

from ._core import (
    AdmissibilityError,
    BernsteinPair,
    ConfigError,
    DomainError,
    bernstein_from_hypo,
    concentration_bound,
    confidence_radius,
    eps_max,
    lambda_of_eps,
    optimal_eps,
    psi,
    psi_star,
    psi_star_inv,
    run_cli,
)


def run(*args):
    """Run a subcommand and return (exit_code, parsed JSON or raw text)."""
    code, out, err = run_cli([str(a) for a in args])
    try:
        return code, json.loads(out)
    except ValueError:
        return code, out or err


__all__ = [
    "AdmissibilityError",
    "BernsteinPair",
    "ConfigError",
    "DomainError",
    "bernstein_from_hypo",
    "concentration_bound",
    "confidence_radius",
    "eps_max",
    "lambda_of_eps",
    "optimal_eps",
    "psi",
    "psi_star",
    "psi_star_inv",
    "run",
    "run_cli",
]
