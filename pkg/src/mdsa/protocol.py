"""MDSA node behavior: discovery, packet preparation, flooding, forwarding.

The protocol has three dissemination phases.  Every node first discovers its
neighbors with a query broadcast, then prepares a single packet holding its
own sensed datum and floods it to all neighbors, and finally each received
packet is stored (one buffer slot per distinct source) and relayed onward by
unicast to one random neighbor until its hop counter runs out.

The hop counter starts at ``total_nodes // degree`` at the source and is
decremented by exactly one per unicast hop, so a packet from a well-connected
node travels few hops (its flood already created many replicas) while a
packet from a sparsely connected node travels far.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .topology import Topology

__all__ = [
    "Packet",
    "Buffer",
    "NodeState",
    "Message",
    "MessageKind",
    "ForwardPolicy",
    "InitCounts",
    "ProtocolError",
    "compute_hop_count",
    "discover_neighbors",
    "prepare_packet",
    "flood_packet",
    "on_receive",
    "collect",
]


class ProtocolError(RuntimeError):
    """A simulation invariant was violated (e.g. delivery to a dead node)."""


class MessageKind(enum.Enum):
    INIT_QUERY = "init_query"
    INIT_REPLY = "init_reply"
    FLOOD = "flood"
    UNICAST = "unicast"


class ForwardPolicy(enum.Enum):
    """What a node does with a forwardable packet when its buffer is full.

    DROP cancels the whole operation (no store, no relay); FORWARD skips the
    store but still relays the packet.
    """

    DROP = "drop"
    FORWARD = "forward"


@dataclass(slots=True)
class Packet:
    """The four-field protocol datum.

    ``flag`` distinguishes old (0) from updated (1) data; it is carried and
    stored but no update flow ever sets it in this simulator.
    """

    source_id: int
    payload: bytes
    hop_count: int
    flag: int = 0

    def describe(self) -> str:
        return (f"src={self.source_id} hops={self.hop_count} "
                f"flag={self.flag} len={len(self.payload)}")


class Buffer:
    """Fixed-capacity packet store, at most one packet per source id.

    Slot 0 holds the node's own packet once it has been prepared.
    """

    __slots__ = ("capacity", "slots", "sources")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"buffer capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.slots: list[Packet] = []
        self.sources: set[int] = set()

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def is_full(self) -> bool:
        return len(self.slots) >= self.capacity

    @property
    def free_slots(self) -> int:
        return self.capacity - len(self.slots)

    def contains_source(self, source_id: int) -> bool:
        return source_id in self.sources

    def store(self, packet: Packet) -> bool:
        """Append if there is room and the source is not already present."""
        if self.is_full or packet.source_id in self.sources:
            return False
        self.slots.append(packet)
        self.sources.add(packet.source_id)
        return True


@dataclass(slots=True)
class NodeState:
    """Mutable per-node simulation state.

    ``neighbor_ids`` is a sorted tuple snapshot of the topology adjacency.
    ``rng`` is this node's private deterministic stream; it is consumed only
    when choosing unicast targets, so delivery order fully determines it.
    """

    id: int
    buffer: Buffer
    rng: random.Random
    sensed_data: bytes
    neighbor_ids: tuple[int, ...] = ()
    hop_budget: int = 0
    alive: bool = True
    data_sent: int = 0
    data_received: int = 0
    init_sent: int = 0
    init_received: int = 0


@dataclass(slots=True)
class Message:
    kind: MessageKind
    sender: int
    receiver: int
    packet: Optional[Packet] = None


class InitCounts(NamedTuple):
    """Per-node initialization ledger: per-link query deliveries and replies."""

    query_deliveries: int
    replies: int


def compute_hop_count(n_total: int, n_neighbors: int) -> int:
    """Initial hop budget: floor(total nodes / neighbor count).

    An isolated node gets 0 — it has nowhere to forward.
    """
    if n_total < 1:
        raise ValueError(f"total node count must be >= 1, got {n_total}")
    if n_neighbors < 0:
        raise ValueError(f"neighbor count must be >= 0, got {n_neighbors}")
    if n_neighbors == 0:
        return 0
    return n_total // n_neighbors


def discover_neighbors(node: NodeState, topo: Topology) -> InitCounts:
    """Neighbor discovery via query broadcast.

    The node floods one query in its range (accounted as one per-link
    delivery per neighbor) and every neighbor answers with one reply.
    Because discovery is symmetric, the node also answers each neighbor's
    query, so both its sent and received counters grow by twice its degree.
    Sets the node's neighbor set and hop budget.
    """
    if not 0 <= node.id < topo.n:
        raise ValueError(f"node id {node.id} not in topology of size {topo.n}")
    adj = topo.adjacency[node.id]
    node.neighbor_ids = adj
    node.hop_budget = compute_hop_count(topo.n, len(adj))
    deg = len(adj)
    node.init_sent += 2 * deg
    node.init_received += 2 * deg
    return InitCounts(query_deliveries=deg, replies=deg)


def prepare_packet(node: NodeState) -> Packet:
    """Build the node's own packet and store it in buffer slot 0.

    Must run after discovery (the hop budget) and before any receive (the
    slot-0 ownership invariant).
    """
    packet = Packet(source_id=node.id, payload=node.sensed_data,
                    hop_count=node.hop_budget, flag=0)
    if node.buffer.slots:
        raise ProtocolError(f"node {node.id}: buffer not empty at prepare time")
    node.buffer.store(packet)
    return packet


def flood_packet(node: NodeState) -> list[Message]:
    """One FLOOD message per neighbor, each carrying the node's own packet
    at the full hop budget.  Isolated nodes flood nothing."""
    if not node.buffer.slots or node.buffer.slots[0].source_id != node.id:
        raise ProtocolError(f"node {node.id}: own packet not prepared")
    own = node.buffer.slots[0]
    messages = [Message(MessageKind.FLOOD, node.id, nbr, own)
                for nbr in node.neighbor_ids]
    node.data_sent += len(messages)
    return messages


def on_receive(node: NodeState, msg: Message,
               policy: ForwardPolicy = ForwardPolicy.DROP) -> Optional[Message]:
    """Handle one incoming FLOOD or UNICAST delivery.

    Store the packet if the buffer has room and the source is new; then, if
    the packet still has hops left, relay it by unicast to one neighbor
    chosen uniformly at random excluding the sender (falling back to the
    sender when it is the only neighbor).  A full buffer cancels the relay
    under the DROP policy; under FORWARD the relay happens anyway.  A
    duplicate with buffer room is not re-stored but is still relayed.
    """
    if not node.alive:
        raise ProtocolError(f"delivery to dead node {node.id}")
    kind = msg.kind
    if kind is not MessageKind.FLOOD and kind is not MessageKind.UNICAST:
        raise ValueError(f"node cannot receive message kind {kind}")
    if msg.receiver != node.id:
        raise ValueError(f"message for {msg.receiver} delivered to {node.id}")

    node.data_received += 1
    packet = msg.packet
    buf = node.buffer
    was_full = buf.is_full
    if not was_full and packet.source_id not in buf.sources:
        buf.slots.append(packet)
        buf.sources.add(packet.source_id)

    if packet.hop_count > 0 and (not was_full or policy is ForwardPolicy.FORWARD):
        nbrs = node.neighbor_ids
        count = len(nbrs)
        if count == 0:
            return None
        if count == 1:
            target = nbrs[0]
        else:
            # uniform over neighbors minus the sender: draw from the first
            # count-1 entries and remap a sender hit to the last entry
            j = node.rng.randrange(count - 1)
            target = nbrs[count - 1] if nbrs[j] == msg.sender else nbrs[j]
        forwarded = Packet(packet.source_id, packet.payload,
                           packet.hop_count - 1, packet.flag)
        node.data_sent += 1
        return Message(MessageKind.UNICAST, node.id, target, forwarded)
    return None


def collect(query_ids, nodes: list[NodeState]) -> set[tuple[int, bytes]]:
    """Union of all (source_id, payload) pairs buffered at the queried nodes,
    deduplicated by source id.  Querying a dead node is an error."""
    recovered: dict[int, bytes] = {}
    for qid in query_ids:
        node = nodes[qid]
        if not node.alive:
            raise ValueError(f"cannot query dead node {qid}")
        for packet in node.buffer.slots:
            recovered.setdefault(packet.source_id, packet.payload)
    return set(recovered.items())
