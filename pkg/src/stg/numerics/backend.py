"""Global dtype switch, seeding, and thread control.

Training runs in float32. Gradient verification flips the whole stack to
float64 through `use_dtype` so finite differences are meaningful at 1e-4
relative tolerance.
"""

from __future__ import annotations

import contextlib
import random
from typing import Iterator

import numpy as np
import torch

_DTYPES = {"f32": torch.float32, "f64": torch.float64}


def ftype(name: str) -> torch.dtype:
    """Resolve 'f32'/'f64' to a torch dtype."""
    if name not in _DTYPES:
        raise ValueError(f"unknown dtype {name!r}, expected 'f32' or 'f64'")
    return _DTYPES[name]


def set_dtype(name: str) -> None:
    """Set the dtype newly created parameters and tensors will use."""
    torch.set_default_dtype(ftype(name))


def current_dtype() -> torch.dtype:
    return torch.get_default_dtype()


@contextlib.contextmanager
def use_dtype(name: str) -> Iterator[None]:
    """Temporarily switch the global default dtype."""
    previous = torch.get_default_dtype()
    torch.set_default_dtype(ftype(name))
    try:
        yield
    finally:
        torch.set_default_dtype(previous)


def seed_everything(seed: int, threads: int = 1) -> None:
    """Seed torch and stdlib RNGs and pin the torch thread count.

    Sampling decisions in this project flow through explicit
    numpy Generators, so this mainly fixes parameter initialization.
    Single-threaded mode is the determinism contract; more threads are
    allowed but bit-identity is only promised at threads=1.
    """
    torch.manual_seed(seed)
    random.seed(seed)
    np.random.seed(seed % (2**32))
    torch.set_num_threads(max(1, threads))
