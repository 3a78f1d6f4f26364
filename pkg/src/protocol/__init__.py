"""
Protocol package for asyndgan-desk
Messages, wire codec, transports and bandwidth accounting
"""

from src.protocol.codec import (
    FRAME_OVERHEAD, MAGIC, VERSION, FrameSize, decode, decode_body, encode, frame_size,
    payload_size, synthetic_batch_cost, tensor_frame_size,
)
from src.protocol.ledger import (
    DEFAULT_BASELINE_PARAMETERS, BandwidthLedger, LedgerEntry, LedgerEvent, baseline_bytes,
    ledger_report,
)
from src.protocol.messages import (
    AuxBatch, Control, ControlKind, Direction, ErrorFeedback, Message, SynthBatch, Variant, control,
)
from src.protocol.transport import (
    DEFAULT_RECV_TIMEOUT, InProcessTransport, Link, TcpTransport, Transport, make_transport,
)

__all__ = [
    'FRAME_OVERHEAD', 'MAGIC', 'VERSION', 'FrameSize', 'decode', 'decode_body', 'encode', 'frame_size',
    'payload_size', 'synthetic_batch_cost', 'tensor_frame_size',
    'DEFAULT_BASELINE_PARAMETERS', 'BandwidthLedger', 'LedgerEntry', 'LedgerEvent', 'baseline_bytes',
    'ledger_report',
    'AuxBatch', 'Control', 'ControlKind', 'Direction', 'ErrorFeedback', 'Message', 'SynthBatch',
    'Variant', 'control',
    'DEFAULT_RECV_TIMEOUT', 'InProcessTransport', 'Link', 'TcpTransport', 'Transport', 'make_transport',
]
