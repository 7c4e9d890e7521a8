"""The four-network bundle and its single-file checkpoint.

A bundle is the unit that moves between the two training stages: the
pretraining stage writes it, the reinforcement stage loads and freezes
it. The checkpoint stores every parameter plus a manifest (dimensions
and the environment fingerprint the bundle was trained against), so a
bundle refuses to run on observations with different geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from stg.errors import CorruptHeaderError, DataFormatError, GeometryMismatchError
from stg.envs.config import EnvConfig, env_fingerprint
from stg.models.config import ModelConfig
from stg.models.critic import Critic
from stg.models.encoder import PixelEncoder
from stg.models.tdr import TemporalDistanceRegressor
from stg.models.transformer import StgTransformer
from stg.numerics import load_tensors, parameter_fingerprint, save_tensors, seed_everything

_MANIFEST_VERSION = 1
_INT_FIELDS = ("embed_dim", "layers", "heads", "block_size", "frame_size", "frame_stack", "tdr_hidden")


@dataclass
class ModelBundle:
    encoder: PixelEncoder
    transformer: StgTransformer
    critic: Critic
    tdr: TemporalDistanceRegressor
    config: ModelConfig
    env_fingerprint: str
    extra_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        # one stable view per group so optimizer state follows parameter identity
        self.generator = nn.ModuleDict(
            {"encoder": self.encoder, "transformer": self.transformer, "tdr": self.tdr}
        )
        self._all = nn.ModuleDict(
            {
                "encoder": self.encoder,
                "transformer": self.transformer,
                "critic": self.critic,
                "tdr": self.tdr,
            }
        )

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def create(cls, config: ModelConfig, fingerprint: str, seed: int = 0) -> "ModelBundle":
        """Fresh bundle with seeded, reproducible initialization."""
        seed_everything(seed)
        return cls(
            encoder=PixelEncoder(config),
            transformer=StgTransformer(config),
            critic=Critic(config),
            tdr=TemporalDistanceRegressor(config),
            config=config,
            env_fingerprint=fingerprint,
        )

    @classmethod
    def create_for_env(cls, env: EnvConfig, seed: int = 0, **model_overrides) -> "ModelBundle":
        config = ModelConfig.for_env(env, **model_overrides)
        return cls.create(config, env_fingerprint(env), seed=seed)

    # ------------------------------------------------------------------
    # stage hand-off
    # ------------------------------------------------------------------

    def freeze(self) -> "ModelBundle":
        """Stop gradients and switch to eval mode; the reward side never trains."""
        for module in self._all.values():
            module.requires_grad_(False)
            module.eval()
        return self

    def fingerprint(self) -> str:
        """Hash over every parameter of all four networks."""
        return parameter_fingerprint(self._all)

    def verify_env(self, env: EnvConfig) -> None:
        # multi-task bundles carry a comma-joined set of fingerprints
        actual = env_fingerprint(env)
        if actual not in self.env_fingerprint.split(","):
            raise GeometryMismatchError(
                f"bundle was trained against environment(s) {self.env_fingerprint}, "
                f"got {actual} ({env.task}, grid {env.grid}, scale {env.scale}, "
                f"stack {env.frame_stack})"
            )

    # ------------------------------------------------------------------
    # checkpoint
    # ------------------------------------------------------------------

    def save(self, path: "str | Path") -> None:
        records: dict[str, torch.Tensor] = {
            "meta/version": torch.tensor(float(_MANIFEST_VERSION)),
            "meta/env_fingerprint": _encode_text(self.env_fingerprint),
            "meta/conv_channels": torch.tensor([float(c) for c in self.config.conv_channels]),
            "meta/critic_widths": torch.tensor([float(w) for w in self.config.critic_widths]),
            "meta/spectral_norm": torch.tensor(float(self.config.critic_spectral_norm)),
        }
        for name in _INT_FIELDS:
            records[f"meta/{name}"] = torch.tensor(float(getattr(self.config, name)))
        for key, value in self.extra_meta.items():
            records[f"meta/extra/{key}"] = torch.tensor(float(value))
        for group, module in self._all.items():
            for key, value in module.state_dict().items():
                records[f"{group}/{key}"] = value
        save_tensors(path, records)

    @classmethod
    def load(cls, path: "str | Path") -> "ModelBundle":
        records = load_tensors(path)
        if "meta/version" not in records:
            raise CorruptHeaderError(f"{path}: not a model bundle (no manifest)")
        version = int(records["meta/version"].item())
        if version != _MANIFEST_VERSION:
            raise CorruptHeaderError(f"{path}: unsupported bundle version {version}")
        try:
            config = ModelConfig(
                conv_channels=tuple(int(c) for c in records["meta/conv_channels"]),
                critic_widths=tuple(int(w) for w in records["meta/critic_widths"]),
                critic_spectral_norm=bool(records["meta/spectral_norm"].item()),
                **{name: int(records[f"meta/{name}"].item()) for name in _INT_FIELDS},
            )
            fingerprint = _decode_text(records["meta/env_fingerprint"])
        except KeyError as exc:
            raise DataFormatError(f"{path}: manifest is missing {exc}") from exc
        extra = {
            key.removeprefix("meta/extra/"): records[key].item()
            for key in records
            if key.startswith("meta/extra/")
        }
        bundle = cls(
            encoder=PixelEncoder(config),
            transformer=StgTransformer(config),
            critic=Critic(config),
            tdr=TemporalDistanceRegressor(config),
            config=config,
            env_fingerprint=fingerprint,
            extra_meta=extra,
        )
        for group, module in bundle._all.items():
            prefix = f"{group}/"
            state = {
                key.removeprefix(prefix): value
                for key, value in records.items()
                if key.startswith(prefix)
            }
            try:
                module.load_state_dict(state, strict=True)
            except RuntimeError as exc:
                raise DataFormatError(f"{path}: {group} parameters do not match: {exc}") from exc
        return bundle


def _encode_text(text: str) -> torch.Tensor:
    return torch.tensor([float(b) for b in text.encode("ascii")])


def _decode_text(tensor: torch.Tensor) -> str:
    return bytes(int(v) for v in tensor).decode("ascii")
