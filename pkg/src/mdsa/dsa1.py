"""Flooding + LT-coding baseline (DSA-1 style) for comparison runs.

Dissemination is an echo flood: every node broadcasts its own reading, and
each node re-broadcasts a reading once per distinct upstream neighbor it
hears it from.  On a connected graph the process saturates every directed
adjacency exactly once per reading, so the data-message ledger has the
closed form ``sum(deg) + n * sum(deg**2)`` with no event simulation needed
(tests replay the event process on small graphs to confirm).

Storage happens during the flood: each acceptance event (the node's own
reading, plus one per distinct upstream neighbor) yields one LT-coded
symbol, capped by buffer capacity, so node ``j`` ends up holding
``min(capacity, degree(j) + 1)`` symbols.  Symbol contents are drawn as
standard LT combinations over all readings, which the flood has delivered
everywhere by quiescence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .ltcodes import DegreeDistribution, EncodedSymbol, lt_decode, robust_soliton, xor_bytes
from .seeding import derive_seed, sensed_payload
from .topology import Topology, is_connected

__all__ = [
    "Dsa1Report",
    "dsa1_data_messages",
    "dsa1_disseminate",
    "dsa1_recover",
]


def dsa1_data_messages(topo: Topology) -> int:
    """Closed-form flood ledger: sum(deg) + n * sum(deg**2)."""
    deg_sum = topo.degree_sum()
    sq_sum = sum(topo.degree(i) ** 2 for i in range(topo.n))
    return deg_sum + topo.n * sq_sum


@dataclass
class Dsa1Report:
    """Outcome of one baseline dissemination + storage pass."""

    n: int
    capacity: int
    data_messages: int
    energy_total: float
    stored: list[list[EncodedSymbol]] = field(repr=False)
    payloads: list[bytes] = field(repr=False)

    @property
    def buffer_used(self) -> list[int]:
        return [len(slots) for slots in self.stored]

    @property
    def percent_unused(self) -> float:
        total = self.n * self.capacity
        free = total - sum(self.buffer_used)
        return 100.0 * free / total


def dsa1_disseminate(topo: Topology, capacity: int,
                     dist: DegreeDistribution | None = None, seed: int = 0,
                     payload_len: int = 16, energy_tx: float = 1.0,
                     energy_rx: float = 0.5) -> Dsa1Report:
    """Run the baseline on ``topo`` and return its report.

    ``dist`` defaults to a robust soliton over all ``n`` readings.  Each
    node uses its own seed-derived RNG stream, so reports do not depend on
    node iteration order.
    """
    if capacity < 1:
        raise ValueError(f"buffer capacity must be >= 1, got {capacity}")
    if not is_connected(topo):
        raise ValueError("baseline dissemination requires a connected topology")
    n = topo.n
    if dist is None:
        dist = robust_soliton(n)
    if dist.k != n:
        raise ValueError(f"degree distribution is over k={dist.k}, expected {n}")

    payloads = [sensed_payload(seed, i, payload_len) for i in range(n)]
    stored: list[list[EncodedSymbol]] = []
    for j in range(n):
        count = min(capacity, topo.degree(j) + 1)
        rng = random.Random(derive_seed(seed, "dsa1-node", j))
        slots = []
        for _ in range(count):
            degree = min(dist.sample(rng), n)
            chosen = rng.sample(range(n), degree)
            payload = payloads[chosen[0]]
            for idx in chosen[1:]:
                payload = xor_bytes(payload, payloads[idx])
            slots.append(EncodedSymbol(id_set=frozenset(chosen), payload=payload))
        stored.append(slots)

    data_messages = dsa1_data_messages(topo)
    return Dsa1Report(
        n=n,
        capacity=capacity,
        data_messages=data_messages,
        energy_total=data_messages * (energy_tx + energy_rx),
        stored=stored,
        payloads=payloads,
    )


def dsa1_recover(report: Dsa1Report, query_ids: set[int]) -> dict[int, bytes]:
    """Decode all symbols held by the queried nodes via peeling."""
    symbols = []
    for qid in query_ids:
        if not 0 <= qid < report.n:
            raise ValueError(f"query id {qid} out of range for n={report.n}")
        symbols.extend(report.stored[qid])
    if not symbols:
        return {}
    return lt_decode(symbols, report.n)
