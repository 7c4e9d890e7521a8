"""Latent-transition transformer.

Attention scores are plain dot products — softmax(q . k) with no
1/sqrt(d) temperature — and the causal mask is additive -inf, so a
masked position contributes an exact float zero and outputs at step i
are bitwise independent of later inputs. Blocks are post-norm: layer
normalization is applied after each residual sum. The network predicts
the *change* between consecutive embeddings; the decoded delta is added
back onto the input, so a zeroed decoder is exactly the identity shift.
"""

from __future__ import annotations

import torch
from torch import nn

from stg.models.config import ModelConfig


class SelfAttention(nn.Module):
    """Multi-head dot-product attention, optionally causally masked.

    Returns (context, weights); weights are (B, H, T, T) rows summing
    to one over the visible positions.
    """

    def __init__(self, dim: int, heads: int, causal: bool):
        super().__init__()
        if dim % heads != 0:
            raise ValueError(f"heads ({heads}) must divide dim ({dim})")
        self.heads = heads
        self.causal = causal
        self.qkv = nn.Linear(dim, 3 * dim)
        self.proj = nn.Linear(dim, dim)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        b, t, d = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        hd = d // self.heads
        q = q.view(b, t, self.heads, hd).transpose(1, 2)
        k = k.view(b, t, self.heads, hd).transpose(1, 2)
        v = v.view(b, t, self.heads, hd).transpose(1, 2)
        scores = q @ k.transpose(-2, -1)  # unscaled on purpose
        if self.causal:
            future = torch.triu(torch.ones(t, t, dtype=torch.bool, device=x.device), 1)
            scores = scores.masked_fill(future, float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        context = (weights @ v).transpose(1, 2).reshape(b, t, d)
        return self.proj(context), weights


class CausalSelfAttention(SelfAttention):
    def __init__(self, dim: int, heads: int):
        super().__init__(dim, heads, causal=True)


class _Block(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        d = config.embed_dim
        self.attn = CausalSelfAttention(d, config.heads)
        self.norm1 = nn.LayerNorm(d)
        self.mlp = nn.Sequential(nn.Linear(d, 4 * d), nn.GELU(), nn.Linear(4 * d, d))
        self.norm2 = nn.LayerNorm(d)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        attended, weights = self.attn(x)
        x = self.norm1(x + attended)
        x = self.norm2(x + self.mlp(x))
        return x, weights


class StgTransformer(nn.Module):
    """Predicts the next embedding for every position of a sequence."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.positions = nn.Parameter(torch.randn(config.block_size, config.embed_dim) * 0.02)
        self.blocks = nn.ModuleList(_Block(config) for _ in range(config.layers))
        self.decoder = nn.Linear(config.embed_dim, config.embed_dim)

    def forward(self, embeddings: torch.Tensor, return_attention: bool = False):
        """(B, T, d) embeddings -> (B, T, d) next-embedding estimates.

        Output i estimates embedding i+1 as input i plus a decoded delta
        and depends only on inputs 0..i.
        """
        if embeddings.ndim != 3:
            raise ValueError(f"expected (B, T, d), got {tuple(embeddings.shape)}")
        b, t, d = embeddings.shape
        if t == 0:
            raise ValueError("empty sequence: need at least one embedding")
        if t > self.config.block_size:
            raise ValueError(
                f"sequence length {t} exceeds block size {self.config.block_size}"
            )
        x = embeddings + self.positions[:t]
        maps = []
        for block in self.blocks:
            x, weights = block(x)
            maps.append(weights)
        predictions = embeddings + self.decoder(x)
        if return_attention:
            return predictions, maps
        return predictions
