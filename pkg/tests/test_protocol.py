"""Protocol state machine unit tests."""

import random

import pytest

from mdsa.protocol import (
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
from mdsa.topology import generate_topology


def make_node(node_id=0, capacity=4, neighbor_ids=(), hop_budget=0, seed=0):
    return NodeState(
        id=node_id,
        buffer=Buffer(capacity),
        rng=random.Random(seed),
        sensed_data=bytes([node_id]) * 4,
        neighbor_ids=tuple(neighbor_ids),
        hop_budget=hop_budget,
    )


class TestHopCount:
    def test_basic_division(self):
        assert compute_hop_count(15, 5) == 3
        assert compute_hop_count(15, 4) == 3
        assert compute_hop_count(100, 7) == 14

    def test_edge_neighbor_counts(self):
        assert compute_hop_count(10, 0) == 0      # isolated
        assert compute_hop_count(10, 1) == 10     # single neighbor
        assert compute_hop_count(10, 10) == 1
        assert compute_hop_count(10, 11) == 0     # denser than the network

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            compute_hop_count(0, 3)
        with pytest.raises(ValueError):
            compute_hop_count(5, -1)


def test_packet_describe_rendering():
    p = Packet(source_id=3, payload=b"0123456789abcdef", hop_count=2)
    assert p.describe() == "src=3 hops=2 flag=0 len=16"
    assert Packet(0, b"", 0, flag=1).describe() == "src=0 hops=0 flag=1 len=0"


class TestBuffer:
    def test_store_and_duplicate_rejection(self):
        buf = Buffer(2)
        assert buf.store(Packet(1, b"a", 0))
        assert not buf.store(Packet(1, b"b", 5))   # same source
        assert buf.contains_source(1)
        assert buf.free_slots == 1
        assert buf.store(Packet(2, b"c", 0))
        assert buf.is_full
        assert not buf.store(Packet(3, b"d", 0))   # full
        assert len(buf) == 2

    def test_rejects_zero_capacity(self):
        with pytest.raises(ValueError):
            Buffer(0)


def test_discover_neighbors_sets_state_and_ledger():
    topo = generate_topology(12, 0.5, seed=1)
    node = make_node(node_id=3)
    counts = discover_neighbors(node, topo)
    deg = topo.degree(3)
    assert node.neighbor_ids == topo.adjacency[3]
    assert node.hop_budget == compute_hop_count(12, deg)
    assert counts.query_deliveries == deg and counts.replies == deg
    assert node.init_sent == 2 * deg
    assert node.init_received == 2 * deg
    bad = make_node(node_id=40)
    with pytest.raises(ValueError):
        discover_neighbors(bad, topo)


def test_prepare_packet_takes_slot_zero_once():
    node = make_node(node_id=2, neighbor_ids=(0, 1), hop_budget=6)
    packet = prepare_packet(node)
    assert node.buffer.slots[0] is packet
    assert packet.source_id == 2
    assert packet.payload == node.sensed_data
    assert packet.hop_count == 6
    assert packet.flag == 0
    with pytest.raises(ProtocolError):
        prepare_packet(node)


def test_flood_sends_one_message_per_neighbor():
    node = make_node(node_id=1, neighbor_ids=(0, 2, 5), hop_budget=4)
    prepare_packet(node)
    msgs = flood_packet(node)
    assert [m.receiver for m in msgs] == [0, 2, 5]
    assert all(m.kind is MessageKind.FLOOD and m.sender == 1 for m in msgs)
    # one shared packet instance, at the full hop budget
    assert all(m.packet is node.buffer.slots[0] for m in msgs)
    assert node.data_sent == 3


def test_flood_requires_prepared_packet():
    node = make_node(node_id=1, neighbor_ids=(0,))
    with pytest.raises(ProtocolError):
        flood_packet(node)


def unicast(sender, receiver, src, hops, payload=b"pppp"):
    return Message(MessageKind.UNICAST, sender, receiver,
                   Packet(src, payload, hops))


class TestOnReceive:
    def test_stores_new_source_and_forwards(self):
        node = make_node(node_id=1, neighbor_ids=(0, 2), hop_budget=3)
        prepare_packet(node)
        out = on_receive(node, unicast(0, 1, src=5, hops=2))
        assert node.buffer.contains_source(5)
        assert node.data_received == 1
        assert out is not None and out.kind is MessageKind.UNICAST
        assert out.sender == 1
        assert out.receiver == 2              # only non-sender neighbor
        assert out.packet.hop_count == 1      # decremented exactly once
        assert out.packet.source_id == 5
        assert node.data_sent == 1

    def test_hop_zero_is_stored_but_never_relayed(self):
        node = make_node(node_id=1, neighbor_ids=(0, 2))
        prepare_packet(node)
        out = on_receive(node, unicast(0, 1, src=7, hops=0))
        assert out is None
        assert node.buffer.contains_source(7)

    def test_duplicate_not_restored_but_still_relayed(self):
        # Line 0-1-2: node 1 already buffered source 0; the duplicate
        # arriving from 0 must go out to 2 with one hop less, and the
        # buffered packet must keep its original hop value.
        node = make_node(node_id=1, neighbor_ids=(0, 2), hop_budget=3)
        prepare_packet(node)
        on_receive(node, unicast(0, 1, src=0, hops=3, payload=b"orig"))
        stored = [p for p in node.buffer.slots if p.source_id == 0][0]
        out = on_receive(node, unicast(0, 1, src=0, hops=2, payload=b"orig"))
        assert [p.source_id for p in node.buffer.slots] == [1, 0]
        assert stored.hop_count == 3
        assert out.receiver == 2 and out.packet.hop_count == 1

    def test_full_buffer_drop_policy_cancels_everything(self):
        node = make_node(node_id=1, capacity=1, neighbor_ids=(0, 2))
        prepare_packet(node)
        out = on_receive(node, unicast(0, 1, src=9, hops=5))
        assert out is None
        assert not node.buffer.contains_source(9)
        assert node.data_sent == 0
        assert node.data_received == 1

    def test_full_buffer_forward_policy_relays_without_storing(self):
        node = make_node(node_id=1, capacity=1, neighbor_ids=(0, 2))
        prepare_packet(node)
        out = on_receive(node, unicast(0, 1, src=9, hops=5),
                         policy=ForwardPolicy.FORWARD)
        assert out is not None and out.receiver == 2
        assert out.packet.hop_count == 4
        assert not node.buffer.contains_source(9)

    def test_single_neighbor_bounces_back_to_sender(self):
        node = make_node(node_id=1, neighbor_ids=(0,))
        prepare_packet(node)
        out = on_receive(node, unicast(0, 1, src=4, hops=2))
        assert out.receiver == 0

    def test_relay_target_never_sender_with_choices(self):
        # duplicates of one source relay forever without filling the buffer
        node = make_node(node_id=1, neighbor_ids=(0, 2, 3, 4), seed=99)
        prepare_packet(node)
        targets = set()
        for _ in range(200):
            out = on_receive(node, unicast(0, 1, src=50, hops=1))
            targets.add(out.receiver)
        assert 0 not in targets
        assert targets == {2, 3, 4}

    def test_relay_choice_is_uniform_over_non_senders(self):
        node = make_node(node_id=1, neighbor_ids=(0, 2, 3), seed=5)
        prepare_packet(node)
        counts = {2: 0, 3: 0}
        for _ in range(3000):
            out = on_receive(node, unicast(0, 1, src=100, hops=1))
            counts[out.receiver] += 1
        assert abs(counts[2] - counts[3]) < 300   # ~5.5 sigma for p=1/2

    def test_isolated_receiver_cannot_relay(self):
        node = make_node(node_id=1, neighbor_ids=())
        prepare_packet(node)
        out = on_receive(node, unicast(0, 1, src=4, hops=3))
        assert out is None

    def test_rejects_wrong_receiver_kind_and_dead_node(self):
        node = make_node(node_id=1, neighbor_ids=(0,))
        prepare_packet(node)
        with pytest.raises(ValueError):
            on_receive(node, unicast(0, 2, src=4, hops=1))
        with pytest.raises(ValueError):
            on_receive(node, Message(MessageKind.INIT_QUERY, 0, 1))
        node.alive = False
        with pytest.raises(ProtocolError):
            on_receive(node, unicast(0, 1, src=4, hops=1))


class TestCollect:
    def build_nodes(self):
        nodes = [make_node(node_id=i, neighbor_ids=()) for i in range(3)]
        for node in nodes:
            prepare_packet(node)
        nodes[0].buffer.store(Packet(2, nodes[2].sensed_data, 1))
        return nodes

    def test_union_deduplicates_by_source(self):
        nodes = self.build_nodes()
        got = collect({0, 2}, nodes)
        assert got == {(0, nodes[0].sensed_data), (2, nodes[2].sensed_data)}

    def test_single_isolated_node_yields_only_itself(self):
        nodes = self.build_nodes()
        assert collect({1}, nodes) == {(1, nodes[1].sensed_data)}

    def test_querying_dead_node_is_an_error(self):
        nodes = self.build_nodes()
        nodes[1].alive = False
        with pytest.raises(ValueError):
            collect({0, 1}, nodes)
