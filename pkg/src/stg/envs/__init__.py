"""Desk-scale pixel gridworlds, scripted experts, and observation datasets."""

from stg.envs.config import EnvConfig, env_fingerprint
from stg.envs.expert import expert_action, greedy_action
from stg.envs.grid import ACTIONS, GridEnv
from stg.envs.dataset import (
    ExpertDataset,
    Trajectory,
    generate_expert_dataset,
    load_dataset,
    merge_datasets,
    sample_pair,
    sample_window,
    save_dataset,
)

__all__ = [
    "ACTIONS",
    "EnvConfig",
    "ExpertDataset",
    "GridEnv",
    "Trajectory",
    "env_fingerprint",
    "expert_action",
    "generate_expert_dataset",
    "greedy_action",
    "load_dataset",
    "merge_datasets",
    "sample_pair",
    "sample_window",
    "save_dataset",
]
