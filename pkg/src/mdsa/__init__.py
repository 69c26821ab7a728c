"""Deterministic simulator for distributed data storage in sensor networks.

Implements the MDSA store-and-forward protocol (neighbor discovery, packet
flood, hop-budgeted unicast storage) on random geometric topologies, plus a
flooding + LT-code baseline for comparison, with a reproducible Monte Carlo
experiment harness and CLI on top.
"""

from .dsa1 import Dsa1Report, dsa1_data_messages, dsa1_disseminate, dsa1_recover
from .engine import (
    ConfigError,
    ExperimentError,
    SimConfig,
    SimReport,
    build_topology,
    measure_recovery,
    run_mdsa,
)
from .ltcodes import (
    CorruptSymbolError,
    DegreeDistribution,
    EncodedSymbol,
    ideal_soliton,
    lt_decode,
    lt_encode,
    robust_soliton,
)
from .protocol import (
    Buffer,
    ForwardPolicy,
    Message,
    MessageKind,
    NodeState,
    Packet,
    ProtocolError,
    collect,
    compute_hop_count,
    discover_neighbors,
    flood_packet,
    on_receive,
    prepare_packet,
)
from .seeding import derive_seed, sensed_payload
from .topology import (
    Topology,
    default_radius,
    generate_connected,
    generate_topology,
    is_connected,
    neighbors,
    radius_for_expected_degree,
    topology_from_text,
    topology_to_text,
)
from .experiments import (
    ComparisonRow,
    ComparisonTable,
    SweepCurve,
    SweepPoint,
    emit_csv,
    emit_plot,
    paper_fig_curves,
    sweep,
    table1,
)

__version__ = "0.1.0"
