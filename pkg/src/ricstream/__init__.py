"""Continual ridge regression with integral losses, carried by the Riccati
state of the associated Hamilton-Jacobi equation."""

from .riccati import (
    DesignSample,
    QuadRegularizer,
    RiccatiState,
    apply_bias,
    evolve,
    hopf_value,
    init_state,
    min_loss,
    minimizer,
    retract,
    retune_bias,
    riccati_rhs,
    rk4_step,
)

__version__ = "0.1.0"

__all__ = [
    "DesignSample",
    "QuadRegularizer",
    "RiccatiState",
    "apply_bias",
    "evolve",
    "hopf_value",
    "init_state",
    "min_loss",
    "minimizer",
    "retract",
    "retune_bias",
    "riccati_rhs",
    "rk4_step",
]
