"""Offline pretraining loop.

Per epoch: refill the sample buffer, take `critic_steps` critic updates
(RMSprop, clamped back into the clip box after each), then one joint
generator update (AdamW over encoder + transformer + TDR) on
alpha * L_mse + beta * L_adv + kappa * L_tdr. Runs are bit-reproducible
for a fixed (config, seed): one RNG drives all sampling, one thread does
all the math.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from stg.envs.dataset import ExpertDataset, merge_datasets
from stg.errors import NumericsError
from stg.models.bundle import ModelBundle
from stg.models.config import ModelConfig
from stg.models.critic import clip_weights
from stg.numerics import Optimizer, backward
from stg.pretraining.config import PretrainConfig
from stg.pretraining.losses import LossReport, draw_batch, loss_dis, loss_gen, loss_tdr

LOSS_COLUMNS = ("step", "L_dis", "L_adv", "L_mse", "L_tdr", "gap")


def pretrain(
    config: PretrainConfig,
    datasets: "list[ExpertDataset] | ExpertDataset",
    out_dir: "str | Path | None" = None,
    log=None,
) -> tuple[ModelBundle, list[LossReport]]:
    """Run the offline stage; returns the trained bundle and loss series.

    If `out_dir` is given, checkpoints land there every
    `checkpoint_every` epochs plus at the end, and the loss series is
    written to losses.csv row by row (so an aborted run keeps its rows).
    A non-finite loss aborts with the last checkpoint intact.
    """
    if isinstance(datasets, ExpertDataset):
        datasets = [datasets]
    pool = merge_datasets(datasets)
    base = ModelConfig.for_env(
        pool.config,
        embed_dim=config.embed_dim,
        layers=config.layers,
        heads=config.heads,
        block_size=config.block_size,
    )
    model_config = base.multi_task() if config.pooled and len(datasets) > 1 else base
    bundle = ModelBundle.create(model_config, pool.fingerprint, seed=config.seed)
    rng = np.random.default_rng(config.seed)

    critic_opt = Optimizer(bundle.critic, kind="rmsprop", lr=config.lr_critic)
    generator_opt = Optimizer(bundle.generator, kind="adamw", lr=config.lr_generator)
    skip_generator = config.alpha == config.beta == config.kappa == 0.0

    out_path = Path(out_dir) if out_dir is not None else None
    writer = csv_file = None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
        csv_file = (out_path / "losses.csv").open("w", newline="")
        writer = csv.writer(csv_file)
        writer.writerow(LOSS_COLUMNS)

    def checkpoint(epochs_done: int, name: str) -> None:
        if out_path is None:
            return
        bundle.extra_meta["pretrain_epochs"] = epochs_done
        bundle.extra_meta["seed"] = config.seed
        bundle.save(out_path / name)

    reports: list[LossReport] = []
    try:
        for epoch in range(config.epochs):
            batch = draw_batch(pool, config, rng)

            d_value = gap = 0.0
            for extra in range(config.critic_steps):
                if extra:
                    batch = draw_batch(pool, config, rng)
                d_loss = loss_dis(batch, bundle)
                d_value = float(d_loss.detach())
                gap = -d_value
                backward(d_loss, bundle.critic)
                critic_opt.step()
                clip_weights(bundle.critic, config.clip_high)

            bundle.critic.requires_grad_(False)
            try:
                l_adv, l_mse = loss_gen(batch, bundle)
                l_tdr = loss_tdr(batch, bundle)
                total = config.alpha * l_mse + config.beta * l_adv + config.kappa * l_tdr
                if not skip_generator:
                    backward(total, bundle.generator)
                    generator_opt.step()
            finally:
                bundle.critic.requires_grad_(True)

            report = LossReport(
                step=epoch,
                loss_dis=d_value,
                loss_adv=float(l_adv.detach()),
                loss_mse=float(l_mse.detach()),
                loss_tdr=float(l_tdr.detach()),
                loss_total=float(total.detach()),
                gap=gap,
            )
            if not report.finite():
                raise NumericsError(
                    f"non-finite loss at epoch {epoch}: "
                    f"dis={report.loss_dis} adv={report.loss_adv} "
                    f"mse={report.loss_mse} tdr={report.loss_tdr}"
                )
            reports.append(report)
            if writer is not None:
                writer.writerow(
                    [epoch, report.loss_dis, report.loss_adv, report.loss_mse,
                     report.loss_tdr, report.gap]
                )
                csv_file.flush()
            if log is not None and (epoch % 20 == 0 or epoch == config.epochs - 1):
                log(
                    f"epoch {epoch:4d}  gap {report.gap:+.5f}  mse {report.loss_mse:.5f}  "
                    f"tdr {report.loss_tdr:.5f}"
                )
            if (epoch + 1) % config.checkpoint_every == 0 and epoch + 1 < config.epochs:
                checkpoint(epoch + 1, f"checkpoint_{epoch + 1:05d}.stgc")
    finally:
        if csv_file is not None:
            csv_file.close()

    checkpoint(config.epochs, "bundle.stgc")
    return bundle, reports


__all__ = ["LOSS_COLUMNS", "pretrain"]
