"""Transition critic scoring directed embedding pairs.

Trained as a weight-clipped Wasserstein critic: after every optimizer
step each parameter is clamped back into [-0.01, 0.01], which keeps the
function Lipschitz and its scores in a narrow, bounded band.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn.utils.parametrizations import spectral_norm

from stg.models.config import ModelConfig

CLIP_BOUND = 0.01


class Critic(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        widths = (2 * config.embed_dim, *config.critic_widths, 1)
        layers: list[nn.Module] = []
        for i, (fan_in, fan_out) in enumerate(zip(widths, widths[1:])):
            linear = nn.Linear(fan_in, fan_out)
            if config.critic_spectral_norm:
                linear = spectral_norm(linear)
            if i:
                layers.append(nn.ReLU())
            layers.append(linear)
        self.net = nn.Sequential(*layers)

    def forward(self, e: torch.Tensor, e_next: torch.Tensor) -> torch.Tensor:
        """Score (..., d) transition pairs; higher means more expert-like."""
        if e.shape != e_next.shape or e.shape[-1] != self.config.embed_dim:
            raise ValueError(
                f"expected matching (..., {self.config.embed_dim}) embeddings, "
                f"got {tuple(e.shape)} and {tuple(e_next.shape)}"
            )
        return self.net(torch.cat([e, e_next], dim=-1)).squeeze(-1)


def clip_weights(critic: nn.Module, bound: float = CLIP_BOUND) -> None:
    """Clamp every parameter into [-bound, bound], in place."""
    with torch.no_grad():
        for parameter in critic.parameters():
            parameter.clamp_(-bound, bound)
