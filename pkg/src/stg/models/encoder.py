"""Pixel encoder: stacked frames to a d-dimensional embedding.

Strided 3x3 convolutions halve the frame per layer, then one affine maps
the flattened features to the embedding. The same instance is shared by
the transformer, critic, and TDR paths — embeddings live in one space.
"""

from __future__ import annotations

import torch
from torch import nn

from stg.errors import GeometryMismatchError
from stg.models.config import ModelConfig


class PixelEncoder(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        layers: list[nn.Module] = []
        channels = config.frame_stack
        for out_channels in config.conv_channels:
            layers += [nn.Conv2d(channels, out_channels, 3, stride=2, padding=1), nn.ReLU()]
            channels = out_channels
        self.conv = nn.Sequential(*layers)
        with torch.no_grad():
            probe = torch.zeros(1, config.frame_stack, config.frame_size, config.frame_size)
            flat = self.conv(probe).flatten(1).shape[1]
        self.head = nn.Linear(flat, config.embed_dim)
        # parameter-free normalization pins the embedding scale; without it
        # the reconstruction term can shrink every embedding toward a
        # constant and the critic and distance heads starve
        self.norm = nn.LayerNorm(config.embed_dim, elementwise_affine=False)

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        """(B, k, H, W) frames -> (B, d) embeddings.

        Accepts raw uint8 frames (scaled to [0, 1]) or pre-scaled floats.
        """
        expected = (self.config.frame_stack, self.config.frame_size, self.config.frame_size)
        if frames.ndim != 4 or tuple(frames.shape[1:]) != expected:
            raise GeometryMismatchError(
                f"encoder expects (B, {expected[0]}, {expected[1]}, {expected[2]}), "
                f"got {tuple(frames.shape)}"
            )
        if frames.dtype == torch.uint8:
            frames = frames.to(torch.get_default_dtype()) / 255.0
        return self.norm(self.head(self.conv(frames).flatten(1)))

    def encode_sequence(self, frames: torch.Tensor) -> torch.Tensor:
        """(B, T, k, H, W) -> (B, T, d), one batched pass."""
        if frames.ndim != 5:
            raise GeometryMismatchError(
                f"expected a (B, T, k, H, W) sequence batch, got {tuple(frames.shape)}"
            )
        b, t = frames.shape[:2]
        return self(frames.reshape(b * t, *frames.shape[2:])).reshape(b, t, -1)
