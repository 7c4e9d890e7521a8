"""Observation-only expert datasets: generation, storage, sampling.

On disk a dataset is a directory: `meta.json` describes geometry and
per-trajectory lengths; each `traj_<idx>.bin` holds magic ``STGD``,
version u32, frame count u32, height u32, width u32, k u32, then raw
uint8 frames in temporal order. Frames are stored once; stacked
observations are rebuilt at load time, so the format physically cannot
carry actions or rewards.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from stg.distance import symlog_distance
from stg.envs.config import EnvConfig, env_fingerprint
from stg.envs.expert import expert_action
from stg.envs.grid import GridEnv
from stg.errors import (
    CorruptHeaderError,
    DataFormatError,
    GeometryMismatchError,
    TruncatedPayloadError,
)

TRAJ_MAGIC = b"STGD"
TRAJ_VERSION = 1
META_VERSION = 1


@dataclass
class Trajectory:
    """Ordered frames of one episode; observations only."""

    frames: np.ndarray  # (n, H, W) uint8

    def __len__(self) -> int:
        return self.frames.shape[0]

    def state(self, index: int, frame_stack: int) -> np.ndarray:
        """Stacked observation at `index`, replicating the first frame
        for positions before the episode start."""
        n = len(self)
        if not 0 <= index < n:
            raise IndexError(f"state index {index} out of range for length {n}")
        picks = [max(0, index - frame_stack + 1 + i) for i in range(frame_stack)]
        return self.frames[picks]

    def states(self, frame_stack: int) -> np.ndarray:
        """All stacked observations, shape (n, k, H, W)."""
        return np.stack([self.state(i, frame_stack) for i in range(len(self))])


@dataclass
class ExpertDataset:
    trajectories: list[Trajectory]
    config: EnvConfig
    fingerprint: str
    generation_attempts: int = 0
    generation_discarded: int = 0

    @property
    def success_rate(self) -> float:
        if self.generation_attempts == 0:
            return 1.0
        return len(self.trajectories) / self.generation_attempts

    @property
    def frame_shape(self) -> tuple[int, int]:
        size = self.config.frame_size
        return (size, size)

    def lengths(self) -> list[int]:
        return [len(t) for t in self.trajectories]


# ----------------------------------------------------------------------
# generation
# ----------------------------------------------------------------------

def generate_expert_dataset(
    config: EnvConfig,
    num_trajectories: int,
    seed: "int | None" = None,
    max_attempts_factor: int = 50,
) -> ExpertDataset:
    """Roll the scripted expert and keep observation sequences only.

    Episodes that miss the goal within the horizon are discarded and
    regenerated (counted in the dataset's generation report). The result
    is fully determined by (config, seed).
    """
    if num_trajectories < 1:
        raise ValueError(f"num_trajectories must be >= 1, got {num_trajectories}")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    env = GridEnv(config)
    kept: list[Trajectory] = []
    attempts = 0
    limit = max_attempts_factor * num_trajectories
    while len(kept) < num_trajectories:
        if attempts >= limit:
            raise RuntimeError(
                f"expert failed too often: {len(kept)}/{num_trajectories} "
                f"trajectories after {attempts} attempts"
            )
        attempts += 1
        env.reset(rng)
        frames = [env._stack[-1].copy()]
        success = False
        while not env.done:
            _, _, success = env.step(expert_action(env))
            frames.append(env._stack[-1].copy())
        if success:
            kept.append(Trajectory(frames=np.stack(frames)))
    return ExpertDataset(
        trajectories=kept,
        config=config,
        fingerprint=env_fingerprint(config),
        generation_attempts=attempts,
        generation_discarded=attempts - len(kept),
    )


# ----------------------------------------------------------------------
# storage
# ----------------------------------------------------------------------

def save_dataset(dataset: ExpertDataset, path: "str | Path") -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    height, width = dataset.frame_shape
    k = dataset.config.frame_stack
    for idx, traj in enumerate(dataset.trajectories):
        n = len(traj)
        header = TRAJ_MAGIC + struct.pack("<5I", TRAJ_VERSION, n, height, width, k)
        payload = np.ascontiguousarray(traj.frames, dtype=np.uint8).tobytes()
        (path / f"traj_{idx}.bin").write_bytes(header + payload)
    meta = {
        "format_version": META_VERSION,
        "fingerprint": dataset.fingerprint,
        "task": dataset.config.task,
        "grid": dataset.config.grid,
        "scale": dataset.config.scale,
        "horizon": dataset.config.horizon,
        "seed": dataset.config.seed,
        "frame_stack": k,
        "trajectory_count": len(dataset.trajectories),
        "trajectory_lengths": dataset.lengths(),
        "generation_attempts": dataset.generation_attempts,
        "generation_discarded": dataset.generation_discarded,
        "generation_success_rate": dataset.success_rate,
    }
    (path / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _load_trajectory(path: Path, height: int, width: int, k: int) -> Trajectory:
    blob = path.read_bytes()
    if blob[:4] != TRAJ_MAGIC:
        raise CorruptHeaderError(f"{path}: bad magic {blob[:4]!r}, expected {TRAJ_MAGIC!r}")
    if len(blob) < 24:
        raise TruncatedPayloadError(f"{path}: header needs 24 bytes, file has {len(blob)}")
    version, n, file_h, file_w, file_k = struct.unpack_from("<5I", blob, 4)
    if version != TRAJ_VERSION:
        raise CorruptHeaderError(f"{path}: unsupported trajectory version {version}")
    if (file_h, file_w, file_k) != (height, width, k):
        raise GeometryMismatchError(
            f"{path}: frames are {file_h}x{file_w} k={file_k}, "
            f"meta.json says {height}x{width} k={k}"
        )
    expected = 24 + n * height * width
    if len(blob) != expected:
        raise TruncatedPayloadError(
            f"{path}: expected {expected} bytes for {n} frames, file has {len(blob)}"
        )
    frames = np.frombuffer(blob, dtype=np.uint8, offset=24).reshape(n, height, width)
    return Trajectory(frames=frames.copy())


def load_dataset(path: "str | Path") -> ExpertDataset:
    path = Path(path)
    meta_path = path / "meta.json"
    if not meta_path.exists():
        raise DataFormatError(f"{path}: missing meta.json")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise CorruptHeaderError(f"{meta_path}: invalid JSON: {exc}") from exc
    if meta.get("format_version") != META_VERSION:
        raise CorruptHeaderError(
            f"{meta_path}: unsupported format_version {meta.get('format_version')!r}"
        )
    config = EnvConfig(
        task=meta["task"],
        grid=meta["grid"],
        scale=meta["scale"],
        horizon=meta["horizon"],
        seed=meta.get("seed", 0),
        frame_stack=meta["frame_stack"],
    )
    if meta["fingerprint"] != env_fingerprint(config):
        raise GeometryMismatchError(
            f"{meta_path}: fingerprint {meta['fingerprint']} does not match "
            f"the recorded geometry (expected {env_fingerprint(config)})"
        )
    size = config.frame_size
    trajectories = []
    for idx in range(meta["trajectory_count"]):
        traj = _load_trajectory(path / f"traj_{idx}.bin", size, size, config.frame_stack)
        if len(traj) != meta["trajectory_lengths"][idx]:
            raise GeometryMismatchError(
                f"traj_{idx}.bin holds {len(traj)} frames, "
                f"meta.json says {meta['trajectory_lengths'][idx]}"
            )
        trajectories.append(traj)
    return ExpertDataset(
        trajectories=trajectories,
        config=config,
        fingerprint=meta["fingerprint"],
        generation_attempts=meta.get("generation_attempts", 0),
        generation_discarded=meta.get("generation_discarded", 0),
    )


def merge_datasets(datasets: "list[ExpertDataset]") -> ExpertDataset:
    """Pool trajectories from several datasets (e.g. different tasks).

    Frame geometry must agree exactly — embeddings from mixed geometry
    would be meaningless. The pooled fingerprint is the comma-joined set
    of source fingerprints, so a bundle trained on the pool can later be
    matched against any one of its source environments.
    """
    if not datasets:
        raise ValueError("need at least one dataset")
    first = datasets[0]
    for other in datasets[1:]:
        same = (
            other.config.frame_size == first.config.frame_size
            and other.config.frame_stack == first.config.frame_stack
        )
        if not same:
            raise GeometryMismatchError(
                f"cannot pool {other.config.frame_size}px/k={other.config.frame_stack} "
                f"frames with {first.config.frame_size}px/k={first.config.frame_stack}"
            )
    if len(datasets) == 1:
        return first
    fingerprints = sorted({d.fingerprint for d in datasets})
    return ExpertDataset(
        trajectories=[t for d in datasets for t in d.trajectories],
        config=first.config,
        fingerprint=",".join(fingerprints),
        generation_attempts=sum(d.generation_attempts for d in datasets),
        generation_discarded=sum(d.generation_discarded for d in datasets),
    )


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------

def sample_window(dataset: ExpertDataset, n: int, rng: np.random.Generator) -> np.ndarray:
    """n consecutive stacked states from one trajectory, shape (n, k, H, W).

    Uniform over trajectories long enough, then uniform over valid starts.
    """
    if n < 1:
        raise ValueError(f"window length must be >= 1, got {n}")
    eligible = [t for t in dataset.trajectories if len(t) >= n]
    if not eligible:
        longest = max(dataset.lengths(), default=0)
        raise ValueError(f"no trajectory has length >= {n} (longest is {longest})")
    traj = eligible[int(rng.integers(len(eligible)))]
    start = int(rng.integers(len(traj) - n + 1))
    k = dataset.config.frame_stack
    return np.stack([traj.state(start + i, k) for i in range(n)])


def sample_pair(
    dataset: ExpertDataset, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, float]:
    """Two states from one trajectory plus their symlog index distance.

    i == j is allowed so the regressor sees the zero anchor; order is kept,
    so targets cover both signs.
    """
    if not dataset.trajectories:
        raise ValueError("dataset is empty")
    traj = dataset.trajectories[int(rng.integers(len(dataset.trajectories)))]
    i = int(rng.integers(len(traj)))
    j = int(rng.integers(len(traj)))
    k = dataset.config.frame_stack
    return traj.state(i, k), traj.state(j, k), symlog_distance(i, j)
