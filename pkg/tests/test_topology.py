"""Topology generation, addressing, and routing checks."""

import pytest

from wormbench.engine import MS, US, Engine
from wormbench.packets import ip_str
from wormbench.topology import (
    AsLayout,
    IntervalSet,
    PfpParams,
    Topology,
    TopologyError,
    build_category1,
    build_category2,
    build_pfp_topology,
    build_single_as,
    compute_routes,
    generate_pfp,
)

GBPS = 1_000_000_000


def _rng(seed=1, label="topology"):
    return Engine(seed).rng_stream(label)


# --- pfp growth ------------------------------------------------------------


def test_pfp_three_nodes_is_the_triangle_seed():
    g = generate_pfp(3, rng=_rng())
    assert sorted(g.edges()) == [(0, 1), (0, 2), (1, 2)]


def test_pfp_rejects_tiny_and_bad_params():
    with pytest.raises(TopologyError):
        generate_pfp(2, rng=_rng())
    with pytest.raises(TopologyError):
        generate_pfp(10, PfpParams(p=0.8, q=0.3), rng=_rng())


def test_pfp_deterministic_and_connected():
    g1 = generate_pfp(200, rng=_rng(seed=7))
    g2 = generate_pfp(200, rng=_rng(seed=7))
    g3 = generate_pfp(200, rng=_rng(seed=8))
    assert sorted(g1.edges()) == sorted(g2.edges())
    assert sorted(g1.edges()) != sorted(g3.edges())
    assert g1.number_of_nodes() == 200
    import networkx as nx

    assert nx.is_connected(g1)


def test_pfp_no_multi_edges_or_self_loops():
    g = generate_pfp(300, rng=_rng(seed=3))
    assert all(u != v for u, v in g.edges())
    # nx.Graph collapses duplicates; edge count must match what degree implies
    assert sum(dict(g.degree()).values()) == 2 * g.number_of_edges()


# --- category 1 ------------------------------------------------------------


def test_category1_exact_counts():
    topo = build_category1()
    roles = {}
    for n in topo.nodes:
        roles[n.role] = roles.get(n.role, 0) + 1
    assert roles == {"core": 4, "gateway": 8, "edge": 16, "server": 60, "client": 140}
    assert len(topo.nodes) == 228
    assert len(topo.subnets) == 4
    assert all(len(s.node_ids) == 57 for s in topo.subnets)
    assert len(topo.servers("HTTP")) == 28
    assert len(topo.hosts()) == 200


def test_category1_link_parameters_match_table():
    topo = build_category1()
    want = {
        ("core", "core"): (50 * GBPS, 3 * MS),
        ("core", "gateway"): (20 * GBPS, 2 * MS),
        ("edge", "gateway"): (10 * GBPS, 250 * US),
        ("edge", "server"): (2_500_000_000, 5 * US),
        ("client", "edge"): (100_000_000, 5 * US),
    }
    seen = set()
    for l in topo.links:
        pair = tuple(sorted((topo.nodes[l.a].role, topo.nodes[l.b].role)))
        assert (l.bandwidth_bps, l.delay_ns) == want[pair], pair
        seen.add(pair)
    assert seen == set(want)
    counts = {}
    for l in topo.links:
        pair = tuple(sorted((topo.nodes[l.a].role, topo.nodes[l.b].role)))
        counts[pair] = counts.get(pair, 0) + 1
    assert counts[("core", "core")] == 6  # full mesh over 4
    assert counts[("core", "gateway")] == 16  # dual-homed gateways
    assert counts[("edge", "gateway")] == 16
    assert counts[("edge", "server")] + counts[("client", "edge")] == 200


def test_category1_survives_any_single_core_gateway_link_loss():
    topo = build_category1()
    core_gw = [
        l for l in topo.links
        if {topo.nodes[l.a].role, topo.nodes[l.b].role} == {"core", "gateway"}
    ]
    assert len(core_gw) == 16
    for removed in core_gw:
        remaining = [l for l in topo.links if l is not removed]
        t2 = Topology("category1", topo.nodes, remaining, topo.subnets)
        assert t2.is_connected()


# --- category 2 ------------------------------------------------------------


def test_category2_exact_counts():
    topo = build_category2(_rng(seed=42))
    roles = {}
    for n in topo.nodes:
        roles[n.role] = roles.get(n.role, 0) + 1
    assert roles["core"] == 10
    assert roles["gateway"] == 20
    assert roles["edge"] == 152
    assert roles["server"] + roles["client"] == 1162
    assert len(topo.subnets) == 10
    assert len({n.as_id for n in topo.nodes}) == 10
    assert len(topo.servers("HTTP")) == 60
    assert topo.is_connected()


def test_category2_link_parameters_match_table():
    topo = build_category2(_rng(seed=42))
    want = {
        ("core", "core"): (40 * GBPS, 4 * MS),
        ("core", "gateway"): (16 * GBPS, 2_500_000),
        ("edge", "gateway"): (8 * GBPS, 300 * US),
        ("edge", "server"): (2 * GBPS, 10 * US),
        ("client", "edge"): (80_000_000, 10 * US),
    }
    for l in topo.links:
        pair = tuple(sorted((topo.nodes[l.a].role, topo.nodes[l.b].role)))
        assert (l.bandwidth_bps, l.delay_ns) == want[pair], pair


def test_category2_cross_as_paths_use_own_gateway_and_core():
    topo = build_category2(_rng(seed=42))
    routes = compute_routes(topo)
    hosts = topo.hosts()
    a = next(h for h in hosts if h.as_id == 0)
    z = next(h for h in hosts if h.as_id == 7)
    path = routes.path(a.id, z.id)
    own = [topo.nodes[x] for x in path if topo.nodes[x].as_id == a.as_id]
    assert sum(1 for n in own if n.role == "gateway") == 1
    assert sum(1 for n in own if n.role == "core") >= 1


# --- addressing ------------------------------------------------------------


def test_addresses_follow_class_scheme():
    topo = build_category1()
    plan = topo.plan
    # one AS -> 10/8; four subnets -> 10.0/16 .. 10.3/16
    assert sorted(plan.subnet_base.values()) == [
        (10 << 24) | (m << 16) for m in range(4)
    ]
    first_hosts = {}
    for s in topo.subnets:
        hosts = sorted(nid for nid in s.node_ids if topo.nodes[nid].is_host)
        first_hosts[s.index] = topo.nodes[hosts[0]].address
    assert ip_str(first_hosts[0]) == "10.0.0.1"
    assert ip_str(first_hosts[1]) == "10.1.0.1"
    h1, h2 = [n for n in topo.nodes if n.subnet_id == 2 and n.is_host][:2]
    assert (h1.address >> 16) == (h2.address >> 16)


def test_addresses_unique_over_category2():
    topo = build_category2(_rng(seed=42))
    addrs = [n.address for n in topo.nodes]
    assert len(addrs) == len(set(addrs))
    assert all(a is not None for a in addrs)


def test_address_capacity_errors():
    from wormbench.topology.addressing import assign_addresses
    from wormbench.topology.model import Node, Subnet

    nodes = []
    subnets = []
    for a in range(201):
        nodes.append(Node(a, "client", a, 0))
        subnets.append(Subnet(a, 0, [a]))
    topo = Topology.__new__(Topology)
    topo.nodes = nodes
    topo.subnets = subnets
    with pytest.raises(TopologyError):
        assign_addresses(topo)


def test_interval_set_basics():
    s = IntervalSet.from_cidrs(["10.0.0.0/30", "10.0.1.0/30"])
    assert s.size == 8
    assert (10 << 24) in s
    assert ((10 << 24) | 5) not in s
    inter = s.intersect((10 << 24) | 256, (10 << 24) | 258)
    assert inter.size == 3
    rng = _rng(seed=5, label="draws")
    drawn = {s.draw(rng) for _ in range(200)}
    assert drawn <= {lo + k for lo, hi in s.intervals for k in range(hi - lo + 1)}
    assert len(drawn) == 8  # all 8 addresses hit in 200 draws


# --- routing ---------------------------------------------------------------


def test_routes_same_edge_hosts_two_hops():
    topo = build_category1()
    routes = compute_routes(topo)
    by_edge = {}
    for h in topo.hosts():
        by_edge.setdefault(routes.attachment(h.id), []).append(h.id)
    edge, members = next((e, m) for e, m in by_edge.items() if len(m) >= 2)
    path = routes.path(members[0], members[1])
    assert path == [members[0], edge, members[1]]


def test_routes_cross_subnet_traverses_core_and_is_symmetric():
    topo = build_category1()
    routes = compute_routes(topo)
    a = next(h for h in topo.hosts() if h.subnet_id == 0)
    z = next(h for h in topo.hosts() if h.subnet_id == 3)
    path = routes.path(a.id, z.id)
    assert any(topo.nodes[x].role == "core" for x in path)
    assert routes.path(z.id, a.id) == list(reversed(path))


def test_routes_all_pairs_reach_within_diameter():
    topo = build_single_as(AsLayout(cores=2, gateways=2, edges=3, hosts=9))
    routes = compute_routes(topo)
    nodes = [n.id for n in topo.nodes]
    for src in nodes:
        for dst in nodes:
            if src == dst:
                continue
            path = routes.path(src, dst)
            assert len(path) - 1 <= len(nodes)
            assert len(set(path)) == len(path)  # loop-free


def test_routes_disconnected_is_hard_error():
    topo = build_single_as(AsLayout(cores=1, gateways=1, edges=1, hosts=2))
    broken = [l for l in topo.links if not (
        topo.nodes[l.a].role == "gateway" or topo.nodes[l.b].role == "gateway"
    )]
    t2 = Topology.__new__(Topology)
    t2.category = "broken"
    t2.nodes = topo.nodes
    t2.links = broken
    t2.subnets = topo.subnets
    t2._adjacency = None
    t2.plan = topo.plan
    with pytest.raises(TopologyError):
        compute_routes(t2)


# --- json round trip --------------------------------------------------------


def test_topology_json_round_trip(tmp_path):
    topo = build_category1()
    path = tmp_path / "topo.json"
    topo.save(path)
    loaded = Topology.load(path)
    assert len(loaded.nodes) == len(topo.nodes)
    assert loaded.category == "category1"
    assert [n.address for n in loaded.nodes] == [n.address for n in topo.nodes]
    assert len(loaded.links) == len(topo.links)
    assert loaded.plan is not None
    assert loaded.plan.node_of(topo.nodes[30].address) == 30


def test_pfp_topology_builder():
    topo = build_pfp_topology(4, _rng(seed=9))
    assert len({n.as_id for n in topo.nodes}) == 4
    assert topo.is_connected()
    assert topo.plan is not None
