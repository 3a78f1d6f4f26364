"""
ParamStore persistence in the ADGW format

Layout (little-endian):
    magic "ADGW" | u32 version | u32 entry count
    per entry: u32 name length | utf-8 name | u8 rank | rank x u32 dims | f64 data
Adam state is not persisted.
"""

import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.autodiff.tensor import ParamStore
from src.exceptions import DecodeError, MagicMismatch, Truncated, VersionMismatch

logger = logging.getLogger(__name__)

WEIGHTS_MAGIC = b"ADGW"
WEIGHTS_VERSION = 1


def params_to_bytes(params: ParamStore) -> bytes:
    chunks = [WEIGHTS_MAGIC, struct.pack("<II", WEIGHTS_VERSION, len(params))]
    for name, value in params.items():
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", value.ndim))
        chunks.append(struct.pack(f"<{value.ndim}I", *value.shape))
        chunks.append(value.astype("<f8").tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        available = len(self.data) - self.pos
        if available < n:
            raise Truncated(what, n, available)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def params_from_bytes(data: bytes) -> ParamStore:
    reader = _Reader(data)
    magic = reader.take(4, "magic")
    if magic != WEIGHTS_MAGIC:
        raise MagicMismatch(WEIGHTS_MAGIC, magic)
    version, count = reader.unpack("<II", "header")
    if version != WEIGHTS_VERSION:
        raise VersionMismatch(WEIGHTS_VERSION, version)

    store = ParamStore()
    for _ in range(count):
        (name_len,) = reader.unpack("<I", "name length")
        try:
            name = reader.take(name_len, "name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise DecodeError(f"parameter name is not valid UTF-8 ({e})") from e
        (rank,) = reader.unpack("<B", f"{name} rank")
        shape = reader.unpack(f"<{rank}I", f"{name} dims")
        size = int(np.prod(shape, dtype=np.int64))
        raw = reader.take(8 * size, f"{name} data")
        store.add(name, np.frombuffer(raw, dtype="<f8").reshape(shape))
    return store


def save_params(params: ParamStore, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_bytes(params_to_bytes(params))
    logger.info(f"Saved {params.num_parameters()} parameters to {path}")
    return path


def load_params(path: Union[str, Path]) -> ParamStore:
    return params_from_bytes(Path(path).read_bytes())
