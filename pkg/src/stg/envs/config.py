"""Environment configuration and the geometry fingerprint."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

TASKS = ("chase", "corridor")


@dataclass(frozen=True)
class EnvConfig:
    """Task and geometry of a pixel gridworld.

    The rendered frame is (grid * scale) pixels square; observations stack
    `frame_stack` consecutive grayscale frames, newest last.
    """

    task: str = "chase"
    grid: int = 8
    scale: int = 4
    horizon: int = 64
    seed: int = 0
    frame_stack: int = 4

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if self.grid < 4:
            raise ValueError(f"grid must be >= 4, got {self.grid}")
        if self.horizon < 8:
            raise ValueError(f"horizon must be >= 8, got {self.horizon}")
        if self.scale < 1:
            raise ValueError(f"scale must be >= 1, got {self.scale}")
        if self.frame_stack < 1:
            raise ValueError(f"frame_stack must be >= 1, got {self.frame_stack}")

    @property
    def frame_size(self) -> int:
        return self.grid * self.scale


def env_fingerprint(config: EnvConfig) -> str:
    """Hash of the fields a pretrained bundle depends on.

    Covers task semantics and frame geometry; horizon and seed are run
    parameters and deliberately excluded, so one bundle serves any horizon.
    """
    key = f"task={config.task};grid={config.grid};scale={config.scale};k={config.frame_stack}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
