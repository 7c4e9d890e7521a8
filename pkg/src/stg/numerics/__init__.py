"""Differentiable tensor computation, optimizers, and gradient verification.

Reverse-mode differentiation is provided by torch's autograd running on CPU.
This package owns everything on top of it: the global dtype switch, seeded
determinism, optimizer construction with the project's defaults, the binary
checkpoint container, and the finite-difference gradient checker.
"""

from stg.numerics.backend import (
    current_dtype,
    ftype,
    seed_everything,
    set_dtype,
    use_dtype,
)
from stg.numerics.checkpoint import load_tensors, save_tensors
from stg.numerics.gradcheck import GradCheckReport, gradient_check
from stg.numerics.optim import Optimizer, backward, parameter_fingerprint

__all__ = [
    "GradCheckReport",
    "Optimizer",
    "backward",
    "current_dtype",
    "ftype",
    "gradient_check",
    "load_tensors",
    "parameter_fingerprint",
    "save_tensors",
    "seed_everything",
    "set_dtype",
    "use_dtype",
]
