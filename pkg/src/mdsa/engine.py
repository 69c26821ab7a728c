"""Deterministic synchronous simulation engine.

One run covers the full protocol lifecycle: connected-topology setup,
neighbor discovery (ledger only), packet prepare + flood, then synchronous
store-and-forward rounds until no messages remain in flight.  Messages sent
in round r are delivered in round r+1 in ascending (receiver, sender) order,
and every node consumes its own seed-derived RNG stream, so identical
configs produce identical reports on any platform.

The delivery loop works on plain tuples with per-node state pulled into
lists; it makes exactly the same RNG draws in the same order as
:func:`mdsa.protocol.on_receive`, which tests enforce by replaying runs
through the protocol objects.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .protocol import (
    Buffer,
    ForwardPolicy,
    NodeState,
    Packet,
    collect,
    compute_hop_count,
)
from .seeding import derive_seed, sensed_payload
from .topology import (
    MAX_RADIUS,
    Topology,
    default_radius,
    generate_connected,
)

__all__ = [
    "ConfigError",
    "ExperimentError",
    "SimConfig",
    "SimReport",
    "build_topology",
    "run_mdsa",
    "measure_recovery",
    "sample_query_ids",
]


class ConfigError(ValueError):
    """Simulation configuration is invalid."""


class ExperimentError(RuntimeError):
    """A measurement cannot be taken (e.g. too few alive nodes to query)."""


AUTO_BUFFER = "auto"


def auto_buffer_capacity(n: int) -> int:
    """Default buffer size: 10% of the network, at least one slot."""
    return max(1, int(0.1 * n + 0.5))


@dataclass
class SimConfig:
    """Validated parameters for one simulation run."""

    n: int
    radius: float | None = None
    buffer_capacity: int | str = AUTO_BUFFER
    forward_policy: ForwardPolicy | str = ForwardPolicy.DROP
    failure_fraction: float = 0.0
    seed: int = 0
    energy_tx: float = 1.0
    energy_rx: float = 0.5
    payload_len: int = 16

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if self.radius is not None:
            if not 0.0 < float(self.radius) <= MAX_RADIUS:
                raise ConfigError(
                    f"radius must be in (0, {MAX_RADIUS:.6f}], got {self.radius!r}")
            self.radius = float(self.radius)
        if isinstance(self.buffer_capacity, str):
            if self.buffer_capacity.lower() != AUTO_BUFFER:
                raise ConfigError(
                    f"buffer capacity must be a positive integer or "
                    f"'{AUTO_BUFFER}', got {self.buffer_capacity!r}")
            self.buffer_capacity = AUTO_BUFFER
        elif not isinstance(self.buffer_capacity, int) or self.buffer_capacity < 1:
            raise ConfigError(
                f"buffer capacity must be >= 1, got {self.buffer_capacity!r}")
        if isinstance(self.forward_policy, str):
            try:
                self.forward_policy = ForwardPolicy(self.forward_policy.lower())
            except ValueError:
                raise ConfigError(
                    f"forward policy must be one of "
                    f"{[p.value for p in ForwardPolicy]}, "
                    f"got {self.forward_policy!r}") from None
        if not 0.0 <= self.failure_fraction < 1.0:
            raise ConfigError(
                f"failure fraction must be in [0, 1), got {self.failure_fraction!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if self.energy_tx < 0 or self.energy_rx < 0:
            raise ConfigError("energy costs must be non-negative")
        if not isinstance(self.payload_len, int) or self.payload_len < 1:
            raise ConfigError(
                f"payload length must be >= 1, got {self.payload_len!r}")

    def resolved_radius(self) -> float:
        return self.radius if self.radius is not None else default_radius(self.n)

    def resolved_capacity(self) -> int:
        if self.buffer_capacity == AUTO_BUFFER:
            return auto_buffer_capacity(self.n)
        return self.buffer_capacity


@dataclass
class SimReport:
    """Ledger and final state of one simulation run."""

    config: SimConfig = field(repr=False)
    topology: Topology = field(repr=False)
    nodes: list[NodeState] = field(repr=False)
    capacity: int = 0
    flood_messages: int = 0
    unicast_messages: int = 0
    init_messages: int = 0
    rounds_to_quiescence: int = 0
    topology_retries: int = 0
    energy_total: float = 0.0
    trace: list[str] | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.topology.n

    @property
    def data_messages(self) -> int:
        return self.flood_messages + self.unicast_messages

    @property
    def buffer_used(self) -> list[int]:
        return [len(node.buffer.slots) for node in self.nodes]

    @property
    def percent_unused(self) -> float:
        total = self.n * self.capacity
        free = total - sum(self.buffer_used)
        return 100.0 * free / total

    @property
    def alive_ids(self) -> list[int]:
        return [node.id for node in self.nodes if node.alive]


def build_topology(cfg: SimConfig) -> tuple[Topology, int]:
    """Generate the connected topology this config describes."""
    return generate_connected(cfg.n, cfg.resolved_radius(), cfg.seed)


def run_mdsa(cfg: SimConfig, topology: Topology | None = None,
             trace: bool = False) -> SimReport:
    """Run the full protocol lifecycle and return its report.

    Pass ``topology`` to reuse a pre-built graph (its ``n`` must match the
    config); otherwise a connected one is generated from the config seed.
    With ``trace`` on, the report carries one line per delivered data
    message in processing order.
    """
    if topology is None:
        topo, retries = build_topology(cfg)
    else:
        if topology.n != cfg.n:
            raise ConfigError(
                f"topology has n={topology.n} but config has n={cfg.n}")
        topo, retries = topology, 0

    n = topo.n
    capacity = cfg.resolved_capacity()
    forward_on_full = cfg.forward_policy is ForwardPolicy.FORWARD
    adj = topo.adjacency
    hop = [compute_hop_count(n, len(adj[i])) for i in range(n)]
    payloads = [sensed_payload(cfg.seed, i, cfg.payload_len) for i in range(n)]
    rngs = [random.Random(derive_seed(cfg.seed, "node", i)) for i in range(n)]

    deg_sum = topo.degree_sum()
    init_messages = 2 * deg_sum

    # Slot 0 holds the node's own packet at its full hop budget.
    buf_sources: list[set[int]] = [{i} for i in range(n)]
    buf_slots: list[list[tuple[int, int]]] = [[(i, hop[i])] for i in range(n)]
    data_sent = [len(adj[i]) for i in range(n)]
    data_received = [0] * n

    trace_lines: list[str] | None = [] if trace else None

    # Flood sends happen in round 0; deliveries start in round 1.
    pending = [(nb, i, i, hop[i]) for i in range(n) for nb in adj[i]]
    flood_messages = len(pending)
    unicast_messages = 0
    rounds = 0
    while pending:
        rounds += 1
        pending.sort()
        nxt = []
        for rcv, snd, src, hp in pending:
            data_received[rcv] += 1
            if trace_lines is not None:
                kind = "flood" if rounds == 1 else "unicast"
                trace_lines.append(
                    f"round={rounds} kind={kind} from={snd} to={rcv} "
                    f"src={src} hops={hp}")
            slots = buf_slots[rcv]
            was_full = len(slots) >= capacity
            if not was_full and src not in buf_sources[rcv]:
                buf_sources[rcv].add(src)
                slots.append((src, hp))
            if hp > 0 and (not was_full or forward_on_full):
                nbrs = adj[rcv]
                count = len(nbrs)
                if count:
                    if count == 1:
                        tgt = nbrs[0]
                    else:
                        j = rngs[rcv].randrange(count - 1)
                        tgt = nbrs[count - 1] if nbrs[j] == snd else nbrs[j]
                    nxt.append((tgt, rcv, src, hp - 1))
                    data_sent[rcv] += 1
                    unicast_messages += 1
        pending = nxt

    # Hop budgets only ever decrement, so delivery cannot outlive them.
    assert rounds <= max(hop, default=0) + 1, "round count exceeded hop budgets"

    nodes = []
    for i in range(n):
        buf = Buffer(capacity)
        for src, hp in buf_slots[i]:
            buf.store(Packet(source_id=src, payload=payloads[src], hop_count=hp))
        deg = len(adj[i])
        nodes.append(NodeState(
            id=i,
            buffer=buf,
            rng=rngs[i],
            sensed_data=payloads[i],
            neighbor_ids=tuple(adj[i]),
            hop_budget=hop[i],
            data_sent=data_sent[i],
            data_received=data_received[i],
            init_sent=2 * deg,
            init_received=2 * deg,
        ))

    failures = int(cfg.failure_fraction * n)
    if failures:
        fail_rng = random.Random(derive_seed(cfg.seed, "failures"))
        for i in fail_rng.sample(range(n), failures):
            nodes[i].alive = False

    data_messages = flood_messages + unicast_messages
    sent = init_messages + data_messages
    energy_total = sent * cfg.energy_tx + sent * cfg.energy_rx

    return SimReport(
        config=cfg,
        topology=topo,
        nodes=nodes,
        capacity=capacity,
        flood_messages=flood_messages,
        unicast_messages=unicast_messages,
        init_messages=init_messages,
        rounds_to_quiescence=1 + rounds,
        topology_retries=retries,
        energy_total=energy_total,
        trace=trace_lines,
    )


def sample_query_ids(n: int, alive_ids: list[int], ratio: float,
                     rng: random.Random) -> set[int]:
    """Sample ceil(ratio * n) distinct alive ids to query.

    The sample size is a fraction of the whole network, not of the
    survivors; raises :class:`ExperimentError` when too few nodes are alive
    so the caller can skip the trial.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"query ratio must be in (0, 1], got {ratio!r}")
    # Epsilon guards ratios like 0.3 whose product lands just above an
    # integer in binary floating point.
    count = max(math.ceil(ratio * n - 1e-9), 1)
    if count > len(alive_ids):
        raise ExperimentError(
            f"need {count} alive nodes to query, only {len(alive_ids)} alive")
    return set(rng.sample(alive_ids, count))


def measure_recovery(report: SimReport, ratio: float, rng: random.Random) -> float:
    """Query a random node sample and return percent of readings recovered."""
    query_ids = sample_query_ids(report.n, report.alive_ids, ratio, rng)
    recovered = collect(query_ids, report.nodes)
    return 100.0 * len(recovered) / report.n
