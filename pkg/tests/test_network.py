"""Forwarding fabric: store-and-forward timing, dead addresses, drops, taps."""

import pytest

from wormbench.engine import Engine
from wormbench.network import Network, NetworkError
from wormbench.packets import PROTO_UDP, Packet
from wormbench.topology import AsLayout, build_single_as, compute_routes


def tiny_net(seed=7, hosts=2, **layout_kw):
    topo = build_single_as(AsLayout(cores=1, gateways=1, edges=1, hosts=hosts, **layout_kw))
    eng = Engine(seed=seed)
    net = Network(eng, topo, compute_routes(topo))
    return eng, topo, net


def udp(src_addr, dst_addr, payload=1000, origin="background", flow_id=1):
    return Packet(uid=1, src_addr=src_addr, dst_addr=dst_addr, protocol=PROTO_UDP,
                  src_port=5000, dst_port=53, payload_len=payload,
                  flow_id=flow_id, origin=origin)


# node ids in tiny_net: 0 core, 1 gateway, 2 edge, 3..N hosts
# addresses: hosts first (10.0.0.1, 10.0.0.2), then core .3, gateway .4, edge .5


def test_two_hop_delivery_time():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    addr4 = topo.plan.address_of(4)
    got = []
    net.register_host(4, lambda pkt, t: got.append(t))
    net.register_host(3, lambda pkt, t: got.append(-1))

    # 1028 B on a 100 Mbps edge link: 82240 ns serialization, 5 us propagation,
    # store-and-forward at the edge router doubles both
    net.submit(udp(addr3, addr4), from_node=3)
    eng.run_until(1_000_000)
    assert got == [174_480]
    assert net.delivered["background"] == 1
    assert net.submitted["background"] == 1


def test_self_addressed_loops_back_instantly():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    got = []
    net.register_host(3, lambda pkt, t: got.append(t))
    net.submit(udp(addr3, addr3), from_node=3)
    eng.run_until(10)
    assert got == [0]


def test_dead_address_dies_at_subnet_anchor():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    base = topo.plan.subnet_base[(0, 0)]
    dead = base + 200  # inside 10.0.0.0/16 but never assigned
    assert topo.plan.node_of(dead) is None
    assert topo.plan.anchor_of(dead) == 2  # the edge router

    net.submit(udp(addr3, dead, origin="worm"), from_node=3)
    eng.run_until(1_000_000)
    assert net.dead_addressed == 1
    assert net.delivered == {"background": 0, "worm": 0}
    assert (3, 2) in net.worm_links  # the scan still consumed edge bandwidth


def test_dead_address_with_no_anchor_dies_at_source():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    net.submit(udp(addr3, 0x63000001), from_node=3)  # 99.0.0.1: no matching prefix
    eng.run_until(1_000_000)
    assert net.dead_addressed == 1
    assert net.worm_links == set()


def test_queue_overflow_drops_and_counts():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    addr4 = topo.plan.address_of(4)
    net.register_host(4, lambda pkt, t: None)
    net.register_host(3, lambda pkt, t: None)
    for i in range(150):
        net.submit(udp(addr3, addr4, flow_id=i), from_node=3)
    eng.run_until(60_000_000_000)
    # one serializing + 100 queued fit; the rest are dropped at the first hop
    assert net.dropped["background"] == 49
    assert net.delivered["background"] == 101
    assert net.submitted["background"] == 150
    assert eng.counters.get("drop.background") == 49


def test_byte_series_conservation():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    addr4 = topo.plan.address_of(4)
    net.register_host(4, lambda pkt, t: None)
    net.register_host(3, lambda pkt, t: None)
    for i in range(5):
        net.submit(udp(addr3, addr4, flow_id=i), from_node=3)
    eng.run_until(60_000_000_000)
    assert sum(net.series_submitted) == 5 * 1028
    assert sum(net.series_delivered) == 5 * 1028
    assert net.series_submitted[0] == 5 * 1028  # all offered in the first 10 ms bin


def test_rtt_estimate_two_hops():
    eng, topo, net = tiny_net()
    addr4 = topo.plan.address_of(4)
    # per hop: 5000 ns delay + 120000 ns to serialize 1500 B at 100 Mbps
    assert net.rtt_estimate(3, addr4) == 2 * 2 * (5_000 + 120_000)
    assert net.rtt_estimate(3, topo.plan.address_of(3)) == 0
    # second lookup hits the cache and agrees
    assert net.rtt_estimate(3, addr4) == 500_000


def test_rtt_estimate_for_unassigned_address_uses_anchor():
    eng, topo, net = tiny_net()
    base = topo.plan.subnet_base[(0, 0)]
    # anchor is the edge router, one hop from a host
    assert net.rtt_estimate(3, base + 200) == 2 * (5_000 + 120_000)


def test_duplicate_host_registration_rejected():
    eng, topo, net = tiny_net()
    net.register_host(3, lambda pkt, t: None)
    with pytest.raises(NetworkError):
        net.register_host(3, lambda pkt, t: None)


def test_default_tap_covers_hosts_not_routers():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    addr4 = topo.plan.address_of(4)
    net.register_host(4, lambda pkt, t: None)
    seen = []
    net.tap = lambda node, pkt, t: seen.append(node)
    net.submit(udp(addr3, addr4), from_node=3)
    eng.run_until(1_000_000)
    assert seen == [3, 4]  # sender NIC, receiver NIC; silence at the edge router


def test_explicit_tap_set_includes_transit_router():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    addr4 = topo.plan.address_of(4)
    net.register_host(4, lambda pkt, t: None)
    seen = []
    net.tap = lambda node, pkt, t: seen.append(node)
    net.tap_nodes = {2, 4}
    net.submit(udp(addr3, addr4), from_node=3)
    eng.run_until(1_000_000)
    assert seen == [2, 4]  # router transit plus receiver; sender excluded


def test_worm_traffic_counted_separately():
    eng, topo, net = tiny_net()
    addr3 = topo.plan.address_of(3)
    addr4 = topo.plan.address_of(4)
    net.register_host(4, lambda pkt, t: None)
    net.submit(udp(addr3, addr4, origin="worm"), from_node=3)
    net.submit(udp(addr3, addr4), from_node=3)
    eng.run_until(1_000_000_000)
    assert net.submitted == {"background": 1, "worm": 1}
    assert net.delivered == {"background": 1, "worm": 1}
    assert net.worm_links == {(3, 2), (2, 4)}
    # background bytes never land in worm bookkeeping
    assert sum(net.series_submitted) == 1028
