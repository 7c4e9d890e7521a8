"""Temporal-distance regressor.

Estimates the signed symlog index distance between two states of one
trajectory from their embeddings alone. The pair is treated as a
two-token sequence with learned slot embeddings — without the slots the
pooled representation would be symmetric in (i, j) and the sign of the
distance would be unlearnable — followed by one bidirectional attention
layer and a small feed-forward head.
"""

from __future__ import annotations

import torch
from torch import nn

from stg.models.config import ModelConfig
from stg.models.transformer import SelfAttention


class TemporalDistanceRegressor(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        d = config.embed_dim
        # unit-scale slots: after pooling, the only trace of argument order
        # is the slot asymmetry, so it must be commensurate with the
        # (normalized) embeddings or the sign of the distance is invisible
        self.slots = nn.Parameter(torch.randn(2, d))
        self.attn = SelfAttention(d, config.heads, causal=False)
        self.norm = nn.LayerNorm(d)
        self.head = nn.Sequential(
            nn.Linear(d, config.tdr_hidden), nn.ReLU(), nn.Linear(config.tdr_hidden, 1)
        )

    def forward(self, e_i: torch.Tensor, e_j: torch.Tensor) -> torch.Tensor:
        """(..., d) embedding pairs -> (...) predicted symlog distances."""
        if e_i.shape != e_j.shape or e_i.shape[-1] != self.config.embed_dim:
            raise ValueError(
                f"expected matching (..., {self.config.embed_dim}) embeddings, "
                f"got {tuple(e_i.shape)} and {tuple(e_j.shape)}"
            )
        lead = e_i.shape[:-1]
        pair = torch.stack([e_i.reshape(-1, e_i.shape[-1]), e_j.reshape(-1, e_j.shape[-1])], dim=1)
        tokens = pair + self.slots
        attended, _ = self.attn(tokens)
        pooled = self.norm(tokens + attended).mean(dim=1)
        return self.head(pooled).squeeze(-1).reshape(lead)
