"""Offline stage: adversarial pretraining of the four-network bundle."""

from stg.pretraining.config import PretrainConfig
from stg.pretraining.losses import (
    LossReport,
    PretrainBatch,
    draw_batch,
    loss_dis,
    loss_gen,
    loss_tdr,
)
from stg.pretraining.trainer import LOSS_COLUMNS, pretrain

__all__ = [
    "LOSS_COLUMNS",
    "LossReport",
    "PretrainBatch",
    "PretrainConfig",
    "draw_batch",
    "loss_dis",
    "loss_gen",
    "loss_tdr",
    "pretrain",
]
