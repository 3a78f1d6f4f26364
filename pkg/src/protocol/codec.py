"""
Wire codec for protocol messages

Frame format (all integers little-endian):

    len u32 | magic "ADGN" | version u16 | variant u8 | round u64 | body

len counts every byte after itself. Bodies:

    AuxBatch       node u32 | tensor
    SynthBatch     node u32 | count u8 | count x (modality u8 | tensor)
    ErrorFeedback  node u32 | modality u8 | tensor | adv f32 | l1 f32
    Control        tag u8

    tensor         rank u8 | rank x dim u32 | f32 data (row-major)
"""

import logging
import struct
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.exceptions import DecodeError, EncodeError, MagicMismatch, Truncated, UnknownVariant, VersionMismatch
from src.protocol.messages import (
    AuxBatch, Control, ControlKind, ErrorFeedback, Message, SynthBatch, Variant,
)

logger = logging.getLogger(__name__)

MAGIC = b"ADGN"
VERSION = 1

LENGTH_PREFIX = struct.Struct("<I")
HEADER = struct.Struct("<4sHBQ")
LENGTH_PREFIX_SIZE = LENGTH_PREFIX.size
FRAME_OVERHEAD = LENGTH_PREFIX.size + HEADER.size

_U8 = struct.Struct("<B")
_U32 = struct.Struct("<I")
_F32 = struct.Struct("<f")
_U32_MAX = 0xFFFFFFFF
_U64_MAX = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class FrameSize:
    framed: int
    payload: int

    @property
    def header(self) -> int:
        return self.framed - self.payload


def _check_range(value: int, upper: int, what: str) -> int:
    if not 0 <= int(value) <= upper:
        raise EncodeError(f"{what} {value} does not fit the wire field (max {upper})")
    return int(value)


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise EncodeError(f"{what} holds non-finite entries")


def _encode_tensor(arr: np.ndarray, what: str) -> bytes:
    arr = np.asarray(arr, dtype=np.float32)
    _check_finite(arr, what)
    rank = _check_range(arr.ndim, 0xFF, f"{what} rank")
    dims = [_check_range(d, _U32_MAX, f"{what} dim") for d in arr.shape]
    return _U8.pack(rank) + struct.pack(f"<{rank}I", *dims) + arr.astype("<f4").tobytes(order="C")


def _encode_scalar(value: float, what: str) -> bytes:
    if not np.isfinite(np.float32(value)):
        raise EncodeError(f"{what} is non-finite")
    return _F32.pack(value)


def _encode_body(body) -> bytes:
    if isinstance(body, AuxBatch):
        return _U32.pack(_check_range(body.node, _U32_MAX, "node")) + _encode_tensor(body.x, "x")
    if isinstance(body, SynthBatch):
        parts = [_U32.pack(_check_range(body.node, _U32_MAX, "node")),
                 _U8.pack(_check_range(len(body.samples), 0xFF, "modality count"))]
        for k, y in zip(body.modalities, body.samples):
            parts.append(_U8.pack(_check_range(k, 0xFF, "modality")))
            parts.append(_encode_tensor(y, f"y_hat[{k}]"))
        return b"".join(parts)
    if isinstance(body, ErrorFeedback):
        return (_U32.pack(_check_range(body.node, _U32_MAX, "node"))
                + _U8.pack(_check_range(body.modality, 0xFF, "modality"))
                + _encode_tensor(body.grad, "grad")
                + _encode_scalar(body.adv, "adv")
                + _encode_scalar(body.l1, "l1"))
    if isinstance(body, Control):
        return _U8.pack(int(body.kind))
    raise EncodeError(f"cannot encode body of type {type(body).__name__}")


def encode(msg: Message) -> bytes:
    """
    Encode a message into one length-prefixed frame.

    Raises:
        EncodeError: non-finite tensor entries or a field outside its wire range
    """
    header = HEADER.pack(MAGIC, VERSION, int(msg.variant), _check_range(msg.round, _U64_MAX, "round"))
    rest = header + _encode_body(msg.body)
    return LENGTH_PREFIX.pack(len(rest)) + rest


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = memoryview(data)
        self.pos = offset

    @property
    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int, what: str) -> memoryview:
        if self.remaining < n:
            raise Truncated(what, n, self.remaining)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: struct.Struct, what: str):
        return fmt.unpack(self.take(fmt.size, what))

    def tensor(self, what: str) -> np.ndarray:
        (rank,) = self.unpack(_U8, f"{what} rank")
        dims = struct.unpack(f"<{rank}I", self.take(4 * rank, f"{what} dims"))
        count = int(np.prod(dims, dtype=np.int64)) if rank else 1
        raw = self.take(4 * count, f"{what} data")
        return np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(dims)


def _decode_body(variant: int, reader: _Reader):
    if variant == Variant.AUX_BATCH:
        (node,) = reader.unpack(_U32, "node")
        return AuxBatch(node, reader.tensor("x"))
    if variant == Variant.SYNTH_BATCH:
        (node,) = reader.unpack(_U32, "node")
        (count,) = reader.unpack(_U8, "modality count")
        modalities: List[int] = []
        samples: List[np.ndarray] = []
        for _ in range(count):
            (k,) = reader.unpack(_U8, "modality")
            modalities.append(k)
            samples.append(reader.tensor(f"y_hat[{k}]"))
        return SynthBatch(node, tuple(modalities), tuple(samples))
    if variant == Variant.ERROR_FEEDBACK:
        (node,) = reader.unpack(_U32, "node")
        (modality,) = reader.unpack(_U8, "modality")
        grad = reader.tensor("grad")
        (adv,) = reader.unpack(_F32, "adv")
        (l1,) = reader.unpack(_F32, "l1")
        return ErrorFeedback(node, modality, grad, adv, l1)
    if variant == Variant.CONTROL:
        (tag,) = reader.unpack(_U8, "control tag")
        try:
            return Control(ControlKind(tag))
        except ValueError:
            raise UnknownVariant(tag, "control tag") from None
    raise UnknownVariant(variant)


def decode_body(rest: bytes) -> Message:
    """Decode the bytes after the length prefix"""
    reader = _Reader(rest)
    magic = bytes(reader.take(4, "magic"))
    if magic != MAGIC:
        raise MagicMismatch(MAGIC, magic)
    version, variant, round_ = struct.unpack("<HBQ", reader.take(HEADER.size - 4, "header"))
    if version != VERSION:
        raise VersionMismatch(VERSION, version)
    body = _decode_body(variant, reader)
    if reader.remaining:
        raise DecodeError(f"{reader.remaining} trailing bytes after {Variant(variant).name} body")
    return Message(round_, body)


def decode(frame: bytes) -> Message:
    """
    Decode one complete frame (length prefix included).

    Raises:
        MagicMismatch, VersionMismatch, UnknownVariant, Truncated
    """
    if len(frame) < LENGTH_PREFIX_SIZE:
        raise Truncated("length prefix", LENGTH_PREFIX_SIZE, len(frame))
    (length,) = LENGTH_PREFIX.unpack_from(frame)
    actual = len(frame) - LENGTH_PREFIX_SIZE
    if actual < length:
        raise Truncated("frame", length, actual)
    if actual > length:
        raise DecodeError(f"{actual - length} bytes beyond the declared frame length")
    return decode_body(frame[LENGTH_PREFIX_SIZE:])


def payload_size(msg: Message) -> int:
    """Tensor data bytes plus f32 scalars"""
    body = msg.body
    if isinstance(body, AuxBatch):
        return 4 * body.x.size
    if isinstance(body, SynthBatch):
        return sum(4 * s.size for s in body.samples)
    if isinstance(body, ErrorFeedback):
        return 4 * body.grad.size + 8
    return 0


def frame_size(msg: Message, frame: bytes = None) -> FrameSize:
    framed = len(frame) if frame is not None else len(encode(msg))
    return FrameSize(framed=framed, payload=payload_size(msg))


def synthetic_batch_cost(batch: int = 32, height: int = 256, width: int = 256,
                         channels: int = 1) -> FrameSize:
    """Cost of one SynthBatch of batch x height x width images per channel, through the real encoder"""
    samples = tuple(np.zeros((batch, height, width), dtype=np.float32) for _ in range(channels))
    msg = Message(0, SynthBatch(0, tuple(range(1, channels + 1)), samples))
    return frame_size(msg, encode(msg))


def tensor_frame_size(shape: Tuple[int, ...]) -> int:
    """Encoded size of one tensor field"""
    return 1 + 4 * len(shape) + 4 * int(np.prod(shape, dtype=np.int64))
