"""Networks: pixel encoder, latent-transition transformer, critic, TDR."""

from stg.distance import symlog, symlog_distance
from stg.models.bundle import ModelBundle
from stg.models.config import ModelConfig
from stg.models.critic import Critic, clip_weights
from stg.models.encoder import PixelEncoder
from stg.models.tdr import TemporalDistanceRegressor
from stg.models.transformer import CausalSelfAttention, SelfAttention, StgTransformer

__all__ = [
    "CausalSelfAttention",
    "SelfAttention",
    "Critic",
    "ModelBundle",
    "ModelConfig",
    "PixelEncoder",
    "StgTransformer",
    "TemporalDistanceRegressor",
    "clip_weights",
    "symlog",
    "symlog_distance",
]
