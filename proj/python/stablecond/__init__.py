"""Isotropic stable processes conditioned to hit spheres and hyperplanes."""

from ._core import (
    ConfigError,
    DomainError,
    ParameterError,
    beta,
    clausen2,
    constants,
    digamma,
    harmonic_H,
    harmonic_M,
    hyp2f1,
    interval_potential,
    ln_gamma,
    lobachevsky,
    parse_config,
    read_path_dump,
    run,
    sample_increments,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "ParameterError",
    "beta",
    "clausen2",
    "constants",
    "digamma",
    "harmonic_H",
    "harmonic_M",
    "hyp2f1",
    "interval_potential",
    "ln_gamma",
    "lobachevsky",
    "parse_config",
    "read_path_dump",
    "run",
    "sample_increments",
]
