"""Central configurations and Maslov/Morse indices of homothetic colliding orbits."""

from ._hmorse import (
    CentralConfiguration,
    CollisionError,
    ConfigError,
    Error,
    HomotheticOrbit,
    IndexMismatchError,
    IntegratorError,
    MassSystem,
    NoConvergenceError,
    NotCentralError,
    SpiralClass,
    SpiralTag,
    classify,
    find_cc,
    galerkin_count,
    grad_potential,
    hess_potential,
    index_theorem_check,
    maslov_profile,
    moment_of_inertia,
    potential,
    preset_cc,
    preset_names,
    verdict,
)

__all__ = [name for name in dir() if not name.startswith("_")]
