"""Shared architecture hyperparameters for the four networks."""

from __future__ import annotations

from dataclasses import dataclass

from stg.envs.config import EnvConfig


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions shared by encoder, transformer, critic, and TDR.

    Defaults are the desk scale: 64-d embeddings, 2 blocks of 2 heads over
    a 16-state window, on 32x32 four-frame observations. `layers` and
    `heads` are the scaling knobs for larger settings (e.g. doubling
    layers when one bundle must cover several tasks at once).
    """

    embed_dim: int = 64
    layers: int = 2
    heads: int = 2
    block_size: int = 16
    frame_size: int = 32
    frame_stack: int = 4
    conv_channels: tuple[int, ...] = (8, 16, 32)
    critic_widths: tuple[int, ...] = (128, 64, 32)
    critic_spectral_norm: bool = False
    tdr_hidden: int = 64

    def __post_init__(self):
        if self.embed_dim < 1 or self.embed_dim % self.heads != 0:
            raise ValueError(
                f"heads ({self.heads}) must divide embed_dim ({self.embed_dim})"
            )
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if self.frame_size < 1 or self.frame_stack < 1:
            raise ValueError("frame geometry must be positive")
        if not self.conv_channels:
            raise ValueError("conv_channels must not be empty")
        # tuples survive JSON / checkpoint round trips as lists
        object.__setattr__(self, "conv_channels", tuple(self.conv_channels))
        object.__setattr__(self, "critic_widths", tuple(self.critic_widths))

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.heads

    @classmethod
    def for_env(cls, env: EnvConfig, **overrides) -> "ModelConfig":
        """Model geometry matching an environment's observations."""
        fields = {"frame_size": env.frame_size, "frame_stack": env.frame_stack}
        fields.update(overrides)
        return cls(**fields)

    def multi_task(self) -> "ModelConfig":
        """Capacity bump for pooled multi-task datasets: twice the blocks."""
        kwargs = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kwargs["layers"] = 2 * self.layers
        return ModelConfig(**kwargs)
