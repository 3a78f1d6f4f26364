"""
Transports between the generator and its nodes

Both implementations move the same encoded frames: an in-process transport with one
asyncio.Queue per link, and a loopback TCP transport with one socket per node.
"""

import asyncio
import logging
import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from src.exceptions import BarrierTimeout, DecodeError, TransportError
from src.protocol.codec import LENGTH_PREFIX, LENGTH_PREFIX_SIZE, decode, encode, payload_size
from src.protocol.ledger import BandwidthLedger
from src.protocol.messages import Direction, Message
from src.utils.helpers import async_retry_with_backoff

logger = logging.getLogger(__name__)

DEFAULT_RECV_TIMEOUT = 30.0
_HANDSHAKE = struct.Struct("<I")


@dataclass(frozen=True)
class Link:
    node: int
    direction: Direction

    @property
    def name(self) -> str:
        return f"node-{self.node}"

    def __str__(self):
        arrow = "->gen" if self.direction is Direction.TO_GENERATOR else "<-gen"
        return f"{self.name}{arrow}"


class Transport(ABC):
    """
    Reliable per-link FIFO delivery of Messages.

    send() encodes, checks round monotonicity and records the frame in the shared
    ledger; recv() blocks until a frame arrives or the timeout expires.
    """

    def __init__(self, n_nodes: int, ledger: Optional[BandwidthLedger] = None,
                 timeout: float = DEFAULT_RECV_TIMEOUT):
        self.n_nodes = n_nodes
        self.ledger = ledger if ledger is not None else BandwidthLedger()
        self.timeout = timeout
        self._last_round: Dict[Link, int] = {}

    async def __aenter__(self):
        await self.start()
        return self

    async def __aexit__(self, exc_type, exc, tb):
        await self.close()

    async def start(self) -> None:
        pass

    async def close(self) -> None:
        pass

    def _link(self, node: int, direction: Direction) -> Link:
        if not 0 <= node < self.n_nodes:
            raise TransportError(f"node-{node}", f"no such link (nodes 0..{self.n_nodes - 1})")
        return Link(node, direction)

    async def send(self, node: int, direction: Direction, msg: Message) -> None:
        link = self._link(node, direction)
        last = self._last_round.get(link)
        if last is not None and msg.round < last:
            raise TransportError(str(link), f"round went backwards ({msg.round} after {last})")
        self._last_round[link] = msg.round

        frame = encode(msg)
        self.ledger.record(link.name, direction, msg, len(frame), payload_size(msg))
        logger.debug(f"{link} round {msg.round}: {msg.variant.name} ({len(frame)} bytes)")
        await self._send_frame(link, frame)

    async def recv(self, node: int, direction: Direction, what: str = "message") -> Message:
        link = self._link(node, direction)
        try:
            frame = await asyncio.wait_for(self._recv_frame(link), timeout=self.timeout)
        except asyncio.TimeoutError:
            raise BarrierTimeout(node, self.timeout, what) from None
        try:
            return decode(frame)
        except DecodeError as e:
            raise TransportError(str(link), f"undecodable frame: {e}") from e

    # convenience wrappers for the two roles

    async def send_to_generator(self, node: int, msg: Message) -> None:
        await self.send(node, Direction.TO_GENERATOR, msg)

    async def send_to_node(self, node: int, msg: Message) -> None:
        await self.send(node, Direction.TO_NODE, msg)

    async def recv_from_node(self, node: int, what: str = "message") -> Message:
        return await self.recv(node, Direction.TO_GENERATOR, what)

    async def recv_from_generator(self, node: int, what: str = "message") -> Message:
        return await self.recv(node, Direction.TO_NODE, what)

    @abstractmethod
    async def _send_frame(self, link: Link, frame: bytes) -> None:
        ...

    @abstractmethod
    async def _recv_frame(self, link: Link) -> bytes:
        ...


class InProcessTransport(Transport):
    """One unbounded asyncio.Queue of encoded frames per link"""

    def __init__(self, n_nodes: int, ledger: Optional[BandwidthLedger] = None,
                 timeout: float = DEFAULT_RECV_TIMEOUT):
        super().__init__(n_nodes, ledger, timeout)
        self._queues: Dict[Link, asyncio.Queue] = {}

    async def start(self) -> None:
        self._queues = {Link(j, d): asyncio.Queue() for j in range(self.n_nodes) for d in Direction}

    def _queue(self, link: Link) -> asyncio.Queue:
        if not self._queues:
            raise TransportError(str(link), "transport not started")
        return self._queues[link]

    async def _send_frame(self, link: Link, frame: bytes) -> None:
        self._queue(link).put_nowait(frame)

    async def _recv_frame(self, link: Link) -> bytes:
        return await self._queue(link).get()


class TcpTransport(Transport):
    """
    Loopback TCP: the generator listens, every node connects once and announces its id
    with a u32 handshake. Writes are serialised per link with an asyncio.Lock.
    """

    def __init__(self, n_nodes: int, ledger: Optional[BandwidthLedger] = None,
                 timeout: float = DEFAULT_RECV_TIMEOUT, host: str = "127.0.0.1", port: int = 0):
        super().__init__(n_nodes, ledger, timeout)
        self.host = host
        self.port = port
        self._server: Optional[asyncio.AbstractServer] = None
        # generator-side and node-side stream pairs, keyed by node id
        self._gen_side: Dict[int, Tuple[asyncio.StreamReader, asyncio.StreamWriter]] = {}
        self._node_side: Dict[int, Tuple[asyncio.StreamReader, asyncio.StreamWriter]] = {}
        self._registered: Dict[int, asyncio.Event] = {}
        self._locks: Dict[Link, asyncio.Lock] = {}

    async def start(self) -> None:
        self._registered = {j: asyncio.Event() for j in range(self.n_nodes)}
        self._locks = {Link(j, d): asyncio.Lock() for j in range(self.n_nodes) for d in Direction}
        self._server = await asyncio.start_server(self._on_connect, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        logger.info(f"TCP transport listening on {self.host}:{self.port}")

        for j in range(self.n_nodes):
            reader, writer = await async_retry_with_backoff(
                lambda: asyncio.open_connection(self.host, self.port)
            )
            writer.write(_HANDSHAKE.pack(j))
            await writer.drain()
            self._node_side[j] = (reader, writer)

        try:
            await asyncio.wait_for(
                asyncio.gather(*(ev.wait() for ev in self._registered.values())), timeout=self.timeout
            )
        except asyncio.TimeoutError:
            missing = [j for j, ev in self._registered.items() if not ev.is_set()]
            raise TransportError(f"node-{missing[0]}", "never completed the handshake") from None

    async def _on_connect(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            (node,) = _HANDSHAKE.unpack(await reader.readexactly(_HANDSHAKE.size))
        except asyncio.IncompleteReadError:
            writer.close()
            return
        if node not in self._registered or node in self._gen_side:
            logger.warning(f"Rejecting connection announcing node {node}")
            writer.close()
            return
        self._gen_side[node] = (reader, writer)
        self._registered[node].set()

    def _streams(self, link: Link, sending: bool) -> Tuple[asyncio.StreamReader, asyncio.StreamWriter]:
        # a node writes TO_GENERATOR on its own socket; the generator writes TO_NODE on the accepted one
        node_end = (link.direction is Direction.TO_GENERATOR) == sending
        table = self._node_side if node_end else self._gen_side
        if link.node not in table:
            raise TransportError(str(link), "not connected")
        return table[link.node]

    async def _send_frame(self, link: Link, frame: bytes) -> None:
        _, writer = self._streams(link, sending=True)
        async with self._locks[link]:
            try:
                writer.write(frame)
                await writer.drain()
            except (ConnectionError, OSError) as e:
                raise TransportError(str(link), f"write failed: {e}") from e

    async def _recv_frame(self, link: Link) -> bytes:
        reader, _ = self._streams(link, sending=False)
        try:
            prefix = await reader.readexactly(LENGTH_PREFIX_SIZE)
            (length,) = LENGTH_PREFIX.unpack(prefix)
            return prefix + await reader.readexactly(length)
        except asyncio.IncompleteReadError as e:
            raise TransportError(str(link), f"connection closed mid-frame ({len(e.partial)} bytes read)") from e

    async def close(self) -> None:
        for table in (self._node_side, self._gen_side):
            for _, writer in table.values():
                writer.close()
            for _, writer in table.values():
                try:
                    await writer.wait_closed()
                except (ConnectionError, OSError):
                    pass
            table.clear()
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None


TRANSPORTS = {"inproc": InProcessTransport, "tcp": TcpTransport}


def make_transport(kind: str, n_nodes: int, ledger: Optional[BandwidthLedger] = None,
                   timeout: float = DEFAULT_RECV_TIMEOUT) -> Transport:
    try:
        cls = TRANSPORTS[kind]
    except KeyError:
        raise ValueError(f"unknown transport {kind!r} (expected one of {sorted(TRANSPORTS)})") from None
    return cls(n_nodes, ledger=ledger, timeout=timeout)
