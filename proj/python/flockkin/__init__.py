"""Particle flocking with collision avoidance.

Thin wrapper over the compiled core; see ``flockkin --help`` for the CLI.
"""

from ._core import (
    ConfigError,
    DomainError,
    ValidationError,
    bounded_lipschitz,
    check_assumptions,
    cstar,
    envelope,
    run_cli,
    simulate,
    w1,
    w1_bruteforce,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "ValidationError",
    "bounded_lipschitz",
    "check_assumptions",
    "cstar",
    "envelope",
    "run_cli",
    "simulate",
    "w1",
    "w1_bruteforce",
]
