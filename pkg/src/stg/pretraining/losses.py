"""The three pretraining losses and per-epoch batch assembly.

Gradient routing is the load-bearing part: the critic loss sees
embeddings and predictions as constants (computed without grad), while
the generator losses run with critic parameters' gradients disabled so
nothing leaks into the next critic step. Both directions are asserted
by tests via parameter fingerprints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from stg.envs.dataset import ExpertDataset, sample_pair, sample_window
from stg.models.bundle import ModelBundle
from stg.pretraining.config import PretrainConfig


@dataclass
class PretrainBatch:
    """One buffer refill: state windows plus independent TDR pairs."""

    windows: torch.Tensor  # (B, n, k, H, W) uint8
    pair_a: torch.Tensor  # (P, k, H, W) uint8
    pair_b: torch.Tensor  # (P, k, H, W) uint8
    pair_targets: torch.Tensor  # (P,) float32 symlog distances

    def __post_init__(self):
        if self.windows.shape[1] < 2:
            raise ValueError(
                f"windows must hold >= 2 states for adjacent pairs, got {self.windows.shape[1]}"
            )


@dataclass
class LossReport:
    """Scalars from one epoch's critic + generator steps."""

    step: int
    loss_dis: float
    loss_adv: float
    loss_mse: float
    loss_tdr: float
    loss_total: float
    gap: float  # mean expert score minus mean predicted score

    def finite(self) -> bool:
        values = (self.loss_dis, self.loss_adv, self.loss_mse, self.loss_tdr, self.gap)
        return all(np.isfinite(v) for v in values)


def draw_batch(dataset: ExpertDataset, config: PretrainConfig, rng: np.random.Generator) -> PretrainBatch:
    windows = np.stack(
        [sample_window(dataset, config.seq_len, rng) for _ in range(config.batch_size)]
    )
    pairs = [sample_pair(dataset, rng) for _ in range(config.tdr_batch)]
    return PretrainBatch(
        windows=torch.from_numpy(windows),
        pair_a=torch.from_numpy(np.stack([p[0] for p in pairs])),
        pair_b=torch.from_numpy(np.stack([p[1] for p in pairs])),
        pair_targets=torch.tensor([p[2] for p in pairs], dtype=torch.float32),
    )


def _transition_pairs(bundle: ModelBundle, windows: torch.Tensor):
    """Embeddings and one-step predictions aligned as directed pairs.

    Returns (current, expert_next, predicted_next), each (B*(n-1), d).
    """
    embeddings = bundle.encoder.encode_sequence(windows)
    predictions = bundle.transformer(embeddings)
    d = embeddings.shape[-1]
    current = embeddings[:, :-1].reshape(-1, d)
    expert_next = embeddings[:, 1:].reshape(-1, d)
    predicted_next = predictions[:, :-1].reshape(-1, d)
    return current, expert_next, predicted_next


def loss_dis(batch: PretrainBatch, bundle: ModelBundle) -> torch.Tensor:
    """Critic loss: score predicted transitions above expert ones is bad.

    Minimizing drives expert scores up and predicted scores down, i.e.
    widens the Wasserstein gap. The generator side is held constant.
    """
    with torch.no_grad():
        current, expert_next, predicted_next = _transition_pairs(bundle, batch.windows)
    return bundle.critic(current, predicted_next).mean() - bundle.critic(current, expert_next).mean()


def loss_gen(batch: PretrainBatch, bundle: ModelBundle) -> tuple[torch.Tensor, torch.Tensor]:
    """(adversarial, reconstruction) generator losses.

    The adversarial term asks the critic to like predicted transitions;
    the reconstruction term is the mean squared embedding error of the
    one-step predictions.
    """
    current, expert_next, predicted_next = _transition_pairs(bundle, batch.windows)
    l_adv = -bundle.critic(current, predicted_next).mean()
    l_mse = ((predicted_next - expert_next) ** 2).mean()
    return l_adv, l_mse


def loss_tdr(batch: PretrainBatch, bundle: ModelBundle) -> torch.Tensor:
    """Squared error of predicted symlog index distances."""
    e_i = bundle.encoder(batch.pair_a)
    e_j = bundle.encoder(batch.pair_b)
    return ((bundle.tdr(e_i, e_j) - batch.pair_targets) ** 2).mean()
