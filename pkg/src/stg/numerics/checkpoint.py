"""Binary checkpoint container.

Layout: magic ``STGC``, format version u32, then repeated records of
(name length u32, UTF-8 name, rank u32, extents u32[rank], little-endian
f32 payload). Everything little-endian. Payloads are always stored as
float32 regardless of the in-memory compute dtype.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping

import numpy as np
import torch

from stg.errors import CorruptHeaderError, TruncatedPayloadError

MAGIC = b"STGC"
VERSION = 1


def save_tensors(path: str | Path, tensors: Mapping[str, "torch.Tensor | np.ndarray"]) -> None:
    """Write named tensors in record order. Order is preserved on load."""
    path = Path(path)
    chunks = [MAGIC, struct.pack("<I", VERSION)]
    for name, value in tensors.items():
        if isinstance(value, torch.Tensor):
            array = value.detach().cpu().numpy()
        else:
            array = np.asarray(value)
        # note: ascontiguousarray would promote rank-0 to rank-1
        array = np.asarray(array, dtype="<f4")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
        chunks.append(array.tobytes())
    path.write_bytes(b"".join(chunks))


def load_tensors(path: str | Path) -> dict[str, torch.Tensor]:
    """Read a checkpoint back as float32 tensors, validating the framing."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise CorruptHeaderError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 8:
        raise TruncatedPayloadError(f"{path}: header needs 8 bytes, file has {len(blob)}")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise CorruptHeaderError(f"{path}: unsupported format version {version}")

    tensors: dict[str, torch.Tensor] = {}
    offset = 8
    total = len(blob)

    def take(count: int, what: str) -> int:
        nonlocal offset
        if offset + count > total:
            raise TruncatedPayloadError(
                f"{path}: {what} needs {offset + count} bytes, file has {total}"
            )
        start = offset
        offset += count
        return start

    while offset < total:
        start = take(4, "record name length")
        (name_len,) = struct.unpack_from("<I", blob, start)
        start = take(name_len, "record name")
        name = blob[start : start + name_len].decode("utf-8")
        start = take(4, f"rank of {name!r}")
        (rank,) = struct.unpack_from("<I", blob, start)
        start = take(4 * rank, f"extents of {name!r}")
        shape = struct.unpack_from(f"<{rank}I", blob, start)
        count = int(np.prod(shape, dtype=np.int64)) if rank else 1
        start = take(4 * count, f"payload of {name!r}")
        array = np.frombuffer(blob, dtype="<f4", count=count, offset=start)
        tensors[name] = torch.from_numpy(array.reshape(shape).copy())
    return tensors
