"""Reverse-mode gradients versus central finite differences.

The checker loops over every element of every parameter, so it is meant
for tiny configurations (a few thousand scalars). Run it under the f64
dtype switch for tolerances tighter than ~1e-2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import torch
from torch import nn

from stg.errors import NumericsError
from stg.numerics.optim import backward, named_parameters


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: str
    worst_index: tuple[int, ...]
    analytic: float
    numeric: float
    per_param: dict[str, float] = field(default_factory=dict)

    def summary(self) -> str:
        return (
            f"max relative error {self.max_rel_error:.3e} at "
            f"{self.worst_param}{list(self.worst_index)} "
            f"(analytic {self.analytic:.6e}, numeric {self.numeric:.6e})"
        )


def gradient_check(
    loss_fn: Callable[[], torch.Tensor],
    target: "nn.Module | list[tuple[str, nn.Parameter]]",
    perturbation: float,
    rel_floor: float = 1e-6,
) -> GradCheckReport:
    """Compare autograd gradients against central finite differences.

    `loss_fn` must be a deterministic closure over `target`'s parameters;
    two baseline evaluations are compared bit-for-bit and any difference
    raises NumericsError. Relative error per element is
    |a - n| / max(|a|, |n|, rel_floor).
    """
    if perturbation <= 0:
        raise ValueError("perturbation must be positive")
    named = [(n, p) for n, p in named_parameters(target) if p.requires_grad]

    with torch.no_grad():
        first = loss_fn().item()
        second = loss_fn().item()
    if first != second:
        raise NumericsError(
            f"loss_fn is not deterministic: {first!r} != {second!r}"
        )

    for _, param in named:
        param.grad = None
    backward(loss_fn(), named)
    analytic = {name: param.grad.detach().clone() for name, param in named}
    for _, param in named:
        param.grad = None

    report = GradCheckReport(
        max_rel_error=0.0, worst_param="", worst_index=(), analytic=0.0, numeric=0.0
    )
    with torch.no_grad():
        for name, param in named:
            flat = param.view(-1)
            grads = analytic[name].view(-1)
            worst_here = 0.0
            for i in range(flat.numel()):
                original = flat[i].item()
                flat[i] = original + perturbation
                plus = loss_fn().item()
                flat[i] = original - perturbation
                minus = loss_fn().item()
                flat[i] = original
                numeric = (plus - minus) / (2.0 * perturbation)
                a = grads[i].item()
                rel = abs(a - numeric) / max(abs(a), abs(numeric), rel_floor)
                worst_here = max(worst_here, rel)
                if rel > report.max_rel_error:
                    index = torch.unravel_index(torch.tensor(i), param.shape)
                    report.max_rel_error = rel
                    report.worst_param = name
                    report.worst_index = tuple(int(x) for x in index)
                    report.analytic = a
                    report.numeric = numeric
            report.per_param[name] = worst_here
    return report
