"""Pretraining hyperparameters with a strict JSON round trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from stg.errors import DataFormatError


@dataclass
class PretrainConfig:
    """Everything the offline stage needs besides the datasets themselves.

    `alpha`, `beta`, `kappa` weight the reconstruction, adversarial, and
    temporal-distance terms of the generator loss. More than one dataset
    path means multi-task pooling; `multi_task=None` resolves from that,
    an explicit bool overrides.
    """

    alpha: float = 0.5
    beta: float = 0.3
    kappa: float = 0.1
    batch_size: int = 64
    tdr_batch: int = 64
    seq_len: int = 4
    lr_generator: float = 1e-3
    lr_critic: float = 1e-3
    clip_low: float = -0.01
    clip_high: float = 0.01
    critic_steps: int = 1
    epochs: int = 200
    seed: int = 0
    checkpoint_every: int = 50
    dataset_paths: list = field(default_factory=list)
    multi_task: "bool | None" = None
    embed_dim: int = 64
    layers: int = 2
    heads: int = 2
    block_size: int = 16

    def __post_init__(self):
        if min(self.alpha, self.beta, self.kappa) < 0:
            raise ValueError("loss coefficients must be non-negative")
        if not (self.clip_low < 0 < self.clip_high):
            raise ValueError(
                f"clip bounds must straddle zero, got ({self.clip_low}, {self.clip_high})"
            )
        if self.clip_high != -self.clip_low:
            raise ValueError(
                f"clip bounds must be symmetric, got ({self.clip_low}, {self.clip_high})"
            )
        if self.seq_len < 2:
            raise ValueError(f"seq_len must be >= 2 (need adjacent pairs), got {self.seq_len}")
        if self.seq_len > self.block_size:
            raise ValueError(
                f"seq_len ({self.seq_len}) cannot exceed block_size ({self.block_size})"
            )
        if self.batch_size < 1 or self.tdr_batch < 1:
            raise ValueError("batch sizes must be >= 1")
        if self.critic_steps < 1:
            raise ValueError(f"critic_steps must be >= 1, got {self.critic_steps}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")
        self.dataset_paths = [str(p) for p in self.dataset_paths]

    @property
    def pooled(self) -> bool:
        if self.multi_task is None:
            return len(self.dataset_paths) > 1
        return self.multi_task

    def to_json(self, path: "str | Path | None" = None) -> str:
        text = json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, path: "str | Path") -> "PretrainConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise DataFormatError(f"{path}: expected a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(raw) - known)
        if unknown:
            raise DataFormatError(f"{path}: unknown keys {unknown}")
        try:
            return cls(**raw)
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
