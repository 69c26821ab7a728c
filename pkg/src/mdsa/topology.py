"""Random geometric network topologies on the unit square.

Nodes are dropped i.i.d. uniform in [0,1]^2 and two nodes are neighbors iff
their Euclidean distance is at most the communication radius.  Node ids are
dense integers 0..n-1 in creation order.  A topology is immutable after
construction and safe to share read-only across concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import derive_seed

__all__ = [
    "Topology",
    "generate_topology",
    "generate_connected",
    "neighbors",
    "is_connected",
    "default_radius",
    "radius_for_expected_degree",
    "topology_to_text",
    "topology_from_text",
]

MAX_RADIUS = math.sqrt(2.0)


@dataclass
class Topology:
    """A generated deployment: positions, radius, and derived adjacency.

    ``adjacency[i]`` is a sorted tuple of neighbor ids; it is symmetric and
    self-loop free by construction.  ``seed`` is the exact seed that
    regenerates this topology via :func:`generate_topology`.
    """

    n: int
    radius: float
    seed: int
    positions: np.ndarray        # shape (n, 2), float64
    adjacency: list[tuple[int, ...]] = field(repr=False)

    def degree(self, node_id: int) -> int:
        return len(self.adjacency[node_id])

    def degree_sum(self) -> int:
        return sum(len(a) for a in self.adjacency)


def generate_topology(n: int, radius: float, seed: int) -> Topology:
    """Drop ``n`` uniform nodes in the unit square and link all pairs within
    ``radius``.  Deterministic for a fixed (n, radius, seed) triple."""
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if not (0.0 < radius <= MAX_RADIUS):
        raise ValueError(f"radius must be in (0, sqrt(2)], got {radius}")

    rng = np.random.default_rng(seed)
    positions = rng.random((n, 2))

    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    linked = dist <= radius
    np.fill_diagonal(linked, False)

    adjacency = [tuple(np.flatnonzero(linked[i]).tolist()) for i in range(n)]
    return Topology(n=n, radius=radius, seed=seed, positions=positions,
                    adjacency=adjacency)


def neighbors(topo: Topology, node_id: int) -> set[int]:
    """Neighbor ids of ``node_id``, as a fresh set."""
    if not 0 <= node_id < topo.n:
        raise ValueError(f"node id {node_id} out of range [0, {topo.n})")
    return set(topo.adjacency[node_id])


def is_connected(topo: Topology) -> bool:
    """True iff the adjacency graph has a single connected component.

    A single node counts as connected.  Iterative traversal from node 0.
    """
    seen = bytearray(topo.n)
    seen[0] = 1
    stack = [0]
    count = 1
    adj = topo.adjacency
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = 1
                count += 1
                stack.append(w)
    return count == topo.n


def radius_for_expected_degree(n: int, target_degree: float) -> float:
    """Radius giving roughly ``target_degree`` expected neighbors.

    Uses the disk-area estimate E[deg] ~= (n-1) * pi * r^2, ignoring border
    truncation; the realized mean degree runs somewhat lower.
    """
    if n < 2:
        return MAX_RADIUS
    r = math.sqrt(target_degree / (math.pi * (n - 1)))
    return min(r, MAX_RADIUS)


def default_radius(n: int) -> float:
    """Preset radius: expected degree ~ 2*ln(n), the usual connectivity
    regime for random geometric graphs."""
    return radius_for_expected_degree(n, 2.0 * math.log(max(n, 2)))


def generate_connected(n: int, radius: float, seed: int,
                       max_attempts: int = 1000) -> tuple[Topology, int]:
    """Regenerate with fresh derived seeds until the topology is connected.

    Returns (topology, retries).  The returned topology's own ``seed`` field
    is the derived seed that regenerates it directly.
    """
    for attempt in range(max_attempts):
        topo = generate_topology(n, radius, derive_seed(seed, "topology", attempt))
        if is_connected(topo):
            return topo, attempt
    raise RuntimeError(
        f"no connected topology in {max_attempts} attempts (n={n}, radius={radius})")


def topology_to_text(topo: Topology) -> str:
    """Serialize to the text form: header ``n radius seed`` then one
    ``id x y`` line per node, 6 fractional digits."""
    lines = [f"{topo.n} {topo.radius:.6f} {topo.seed}"]
    for i in range(topo.n):
        x, y = topo.positions[i]
        lines.append(f"{i} {x:.6f} {y:.6f}")
    return "\n".join(lines) + "\n"


def topology_from_text(text: str) -> Topology:
    """Rebuild a topology from its text form.

    Positions are read back at 6-digit precision, so adjacency can differ
    from the original for pairs lying within rounding distance of the radius.
    """
    rows = [ln for ln in text.splitlines() if ln.strip()]
    head = rows[0].split()
    n, radius, seed = int(head[0]), float(head[1]), int(head[2])
    if len(rows) != n + 1:
        raise ValueError(f"expected {n} node lines, got {len(rows) - 1}")
    positions = np.zeros((n, 2))
    for ln in rows[1:]:
        idx, x, y = ln.split()
        positions[int(idx)] = (float(x), float(y))
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    linked = dist <= radius
    np.fill_diagonal(linked, False)
    adjacency = [tuple(np.flatnonzero(linked[i]).tolist()) for i in range(n)]
    return Topology(n=n, radius=radius, seed=seed, positions=positions,
                    adjacency=adjacency)
