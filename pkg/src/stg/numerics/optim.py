"""Backward-pass plumbing and optimizer construction.

Two optimizers are used in this project: AdamW for the generator side
(encoder, transformer, distance regressor, policy) and RMSprop for the
clipped critic. Defaults follow the recorded configuration: AdamW betas
(0.9, 0.999), eps 1e-8, weight decay 0.01; RMSprop alpha 0.99, eps 1e-8.
"""

from __future__ import annotations

import hashlib
from typing import Callable, Iterable, Sequence

import torch
from torch import nn

from stg.errors import NumericsError

NamedParams = Sequence[tuple[str, nn.Parameter]]


def named_parameters(target: "nn.Module | Iterable[tuple[str, nn.Parameter]]") -> list[tuple[str, nn.Parameter]]:
    if isinstance(target, nn.Module):
        return list(target.named_parameters())
    return list(target)


def backward(loss: torch.Tensor, target: "nn.Module | NamedParams") -> None:
    """Backpropagate a scalar loss and leave a gradient on every parameter.

    Parameters the loss does not reach get an explicit zero gradient, so a
    following optimizer step never sees a missing accumulator. Raises
    NumericsError for non-scalar or non-finite losses and for non-finite
    gradients (naming the parameter; rerun the loss under
    `trace_nan_origin` to find the producing op).
    """
    if loss.dim() != 0:
        raise NumericsError(f"loss must be scalar, got shape {tuple(loss.shape)}")
    if not torch.isfinite(loss):
        raise NumericsError(f"loss is not finite: {loss.item()!r}")
    loss.backward()
    for name, param in named_parameters(target):
        if not param.requires_grad:
            continue
        if param.grad is None:
            param.grad = torch.zeros_like(param)
        elif not torch.isfinite(param.grad).all():
            raise NumericsError(
                f"non-finite gradient in parameter {name!r}; "
                "rerun under trace_nan_origin for the originating op"
            )


def trace_nan_origin(loss_fn: Callable[[], torch.Tensor], target: "nn.Module | NamedParams") -> None:
    """Re-run a failing loss with autograd anomaly detection enabled.

    torch's anomaly mode raises at the op that produced the NaN, so the
    resulting NumericsError carries the op name. Slow; diagnostics only.
    """
    try:
        with torch.autograd.detect_anomaly():
            loss = loss_fn()
            loss.backward()
    except RuntimeError as exc:
        raise NumericsError(f"NaN origin: {exc}") from exc
    for name, param in named_parameters(target):
        if param.grad is not None and not torch.isfinite(param.grad).all():
            raise NumericsError(f"non-finite gradient in parameter {name!r}")


class Optimizer:
    """AdamW or RMSprop over a fixed parameter set, with step counting.

    `step` requires a gradient on every owned parameter (zero counts,
    missing does not) and zeroes gradients after applying the update.
    """

    def __init__(
        self,
        target: "nn.Module | NamedParams",
        kind: str,
        lr: float,
        weight_decay: float = 0.01,
        betas: tuple[float, float] = (0.9, 0.999),
        alpha: float = 0.99,
        eps: float = 1e-8,
    ):
        self.named = named_parameters(target)
        params = [p for _, p in self.named]
        if kind == "adamw":
            self._opt = torch.optim.AdamW(
                params, lr=lr, betas=betas, eps=eps, weight_decay=weight_decay
            )
        elif kind == "rmsprop":
            self._opt = torch.optim.RMSprop(params, lr=lr, alpha=alpha, eps=eps)
        else:
            raise ValueError(f"unknown optimizer kind {kind!r}")
        self.kind = kind
        self.lr = lr
        self.steps = 0

    def step(self) -> None:
        for name, param in self.named:
            if param.requires_grad and param.grad is None:
                raise NumericsError(f"missing gradient for parameter {name!r}")
        self._opt.step()
        self._opt.zero_grad(set_to_none=True)
        self.steps += 1


def parameter_fingerprint(target: "nn.Module | NamedParams") -> str:
    """Order-sensitive sha256 over parameter names and raw values."""
    digest = hashlib.sha256()
    for name, param in named_parameters(target):
        digest.update(name.encode("utf-8"))
        digest.update(param.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()
