"""Pcap container format, per-node recording, logs and manifests."""

import json
import os
import struct

import pytest

from wormbench.capture import (
    CaptureError,
    PcapWriter,
    TraceRecorder,
    capture_points,
    files_digest,
    finalize_dataset,
    open_pcap,
    write_flow_log,
    write_ground_truth,
    write_run_manifest,
    write_series,
    write_worm_flows,
)
from wormbench.engine import Engine, seconds
from wormbench.network import Network
from wormbench.packets import (
    ACK,
    PROTO_ICMP,
    PROTO_TCP,
    PROTO_UDP,
    PSH,
    SYN,
    Packet,
    ip_str,
    serialize,
)
from wormbench.topology import AsLayout, build_single_as, compute_routes
from wormbench.traffic import MIX_CATEGORY1, TrafficSystem, build_mix
from wormbench.traffic.apps import FlowRecord
from wormbench.worm.state import InfectionRecord

SERVER_MIX = {"HTTP": 2, "HTTPS": 1, "DNS": 1, "FTP": 1, "mail": 1, "interactive": 1}


# ---------------------------------------------------------- reference reader
# Stand-alone parser written from the file-format constants; shares no code
# with the writer so round-trip failures cannot cancel out.

def read_pcap(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    assert len(blob) >= 24
    header = struct.unpack("<IHHiIII", blob[:24])
    records = []
    off = 24
    while off < len(blob):
        ts_sec, ts_usec, incl, orig = struct.unpack("<IIII", blob[off:off + 16])
        off += 16
        records.append((ts_sec, ts_usec, incl, orig, blob[off:off + incl]))
        off += incl
    assert off == len(blob), "trailing garbage after last record"
    return header, records


def ocsum(data: bytes) -> int:
    """Ones-complement sum folded to 16 bits (independent of the writer)."""
    if len(data) % 2:
        data += b"\x00"
    total = 0
    for i in range(0, len(data), 2):
        total += (data[i] << 8) | data[i + 1]
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return total


def parse_ip(wire):
    vihl, tos, total, ident, frag, ttl, proto, csum, src, dst = struct.unpack(
        "!BBHHHBBHII", wire[:20])
    assert vihl == 0x45, "IPv4, 20-byte header"
    assert total == len(wire)
    assert ocsum(wire[:20]) == 0xFFFF, "header checksum must validate"
    return {"proto": proto, "src": src, "dst": dst, "ttl": ttl}


def udp_pkt(uid=1, src=0x0A000001, dst=0x0A000002, sport=5000, dport=53,
            payload=100, flow=42):
    return Packet(uid=uid, src_addr=src, dst_addr=dst, protocol=PROTO_UDP,
                  src_port=sport, dst_port=dport, payload_len=payload,
                  flow_id=flow)


# ------------------------------------------------------------- file format


def test_global_header_bytes(tmp_path):
    path = str(tmp_path / "x.pcap")
    w = open_pcap(path)
    w.close()
    with open(path, "rb") as fh:
        raw = fh.read()
    assert raw[:4] == bytes.fromhex("d4c3b2a1")
    magic, vmaj, vmin, thiszone, sigfigs, snaplen, network = struct.unpack(
        "<IHHiIII", raw)
    assert magic == 0xA1B2C3D4
    assert (vmaj, vmin) == (2, 4)
    assert thiszone == 0 and sigfigs == 0
    assert snaplen == 65535
    assert network == 101


def test_record_framing_and_timestamp_truncation(tmp_path):
    path = str(tmp_path / "one.pcap")
    w = open_pcap(path)
    t = 1_234_567_891_234  # ns
    w.write(udp_pkt(payload=376), t)
    w.close()
    header, records = read_pcap(path)
    assert len(records) == 1
    ts_sec, ts_usec, incl, orig, wire = records[0]
    assert ts_sec == 1234 and ts_usec == 567_891  # microsecond truncation
    assert incl == orig == 376 + 8 + 20 == 404
    assert len(wire) == 404
    assert os.path.getsize(path) == 24 + 16 + 404


def test_ip_and_tcp_fields_on_the_wire(tmp_path):
    pkt = Packet(uid=7, src_addr=0x0A000102, dst_addr=0x0A000201,
                 protocol=PROTO_TCP, src_port=50123, dst_port=80,
                 payload_len=99, tcp_seq=1000, tcp_ack=2000,
                 tcp_flags=PSH | ACK, flow_id=9)
    path = str(tmp_path / "t.pcap")
    w = open_pcap(path, payload_seed=3)
    w.write(pkt, 10_000)
    w.close()
    _, records = read_pcap(path)
    wire = records[0][4]
    ip = parse_ip(wire)
    assert ip["proto"] == PROTO_TCP
    assert ip["src"] == 0x0A000102 and ip["dst"] == 0x0A000201
    sport, dport, seq, ack, offflags, win, csum, urg = struct.unpack(
        "!HHIIHHHH", wire[20:40])
    assert (sport, dport) == (50123, 80)
    assert (seq, ack) == (1000, 2000)
    assert offflags == (5 << 12) | PSH | ACK
    assert csum == 0  # zero unless the l4 checksum flag is set
    assert len(wire) == 20 + 20 + 99
    # deterministic payload: same packet serializes to identical bytes
    assert serialize(pkt, 3) == wire


def test_icmp_checksum_always_validates(tmp_path):
    pkt = Packet(uid=1, src_addr=1, dst_addr=2, protocol=PROTO_ICMP,
                 payload_len=56, icmp_type=8, flow_id=77)
    wire = serialize(pkt, payload_seed=5)
    assert ocsum(wire[20:]) == 0xFFFF


def test_l4_checksum_flag_validates_under_pseudo_header():
    for pkt in (
        udp_pkt(payload=33),
        Packet(uid=2, src_addr=0x0A000001, dst_addr=0x0A000002,
               protocol=PROTO_TCP, src_port=1, dst_port=2, payload_len=10,
               tcp_seq=5, tcp_ack=6, tcp_flags=ACK, flow_id=3),
    ):
        wire = serialize(pkt, payload_seed=1, l4_checksums=True)
        l4 = wire[20:]
        pseudo = struct.pack("!IIBBH", pkt.src_addr, pkt.dst_addr, 0,
                             pkt.protocol, len(l4))
        assert ocsum(pseudo + l4) == 0xFFFF


def test_round_trip_with_reference_reader(tmp_path):
    import random
    rng = random.Random(2024)
    path = str(tmp_path / "many.pcap")
    w = open_pcap(path, payload_seed=9)
    sent = []
    t = 0
    for i in range(300):
        t += rng.randint(0, 2_000_000)
        proto = rng.choice((PROTO_TCP, PROTO_UDP, PROTO_ICMP))
        pkt = Packet(uid=i + 1, src_addr=rng.getrandbits(32),
                     dst_addr=rng.getrandbits(32), protocol=proto,
                     src_port=rng.randint(1, 65535), dst_port=rng.randint(1, 65535),
                     payload_len=rng.randint(0, 1460),
                     tcp_seq=rng.getrandbits(16), tcp_ack=rng.getrandbits(16),
                     tcp_flags=ACK if proto == PROTO_TCP else 0,
                     icmp_type=8 if proto == PROTO_ICMP else 0,
                     flow_id=rng.randint(1, 10_000))
        w.write(pkt, t)
        sent.append((pkt, t))
    w.close()
    header, records = read_pcap(path)
    assert header[6] == 101
    assert len(records) == 300 == w.count
    for (pkt, t), (ts_sec, ts_usec, incl, orig, wire) in zip(sent, records):
        assert incl == orig == pkt.size_bytes == len(wire)
        assert ts_sec == t // 1_000_000_000
        assert ts_usec == (t % 1_000_000_000) // 1_000
        ip = parse_ip(wire)
        assert ip["proto"] == pkt.protocol
        assert ip["src"] == pkt.src_addr and ip["dst"] == pkt.dst_addr


def test_timestamp_regression_is_a_hard_error(tmp_path):
    w = open_pcap(str(tmp_path / "r.pcap"))
    w.write(udp_pkt(), 100)
    w.write(udp_pkt(uid=2), 100)  # equal is fine
    with pytest.raises(CaptureError):
        w.write(udp_pkt(uid=3), 99)


def test_idle_host_file_is_a_valid_empty_pcap(tmp_path):
    path = str(tmp_path / "idle.pcap")
    open_pcap(path).close()
    header, records = read_pcap(path)
    assert header[0] == 0xA1B2C3D4
    assert records == []


def test_endpoint_files_agree_byte_for_byte(tmp_path):
    pkt = udp_pkt(payload=256)
    a = open_pcap(str(tmp_path / "a.pcap"), payload_seed=4)
    b = open_pcap(str(tmp_path / "b.pcap"), payload_seed=4)
    a.write(pkt, 1_000)   # send time
    b.write(pkt, 5_000)   # delivery time
    a.close(); b.close()
    _, ra = read_pcap(str(tmp_path / "a.pcap"))
    _, rb = read_pcap(str(tmp_path / "b.pcap"))
    assert ra[0][4] == rb[0][4]          # identical wire bytes
    assert ra[0][:2] != rb[0][:2]        # only the timestamps differ


# --------------------------------------------------------------- recording


def build_system(seed=11, start_sources=True):
    topo = build_single_as(
        AsLayout(cores=1, gateways=2, edges=4, hosts=20, server_mix=SERVER_MIX))
    eng = Engine(seed=seed)
    net = Network(eng, topo, compute_routes(topo))
    ts = TrafficSystem(eng, net, build_mix(MIX_CATEGORY1))
    ts.install(start_sources=start_sources)
    return eng, topo, net, ts


def test_capture_points_default_hosts_and_optional_routers():
    topo = build_single_as(
        AsLayout(cores=1, gateways=2, edges=4, hosts=20, server_mix=SERVER_MIX))
    assert capture_points(topo) == set(range(7, 27))
    assert capture_points(topo, include_routers=True) == set(range(0, 27))


def test_recorder_conservation_and_wire_validity(tmp_path):
    eng, topo, net, ts = build_system()
    rec = TraceRecorder(net, str(tmp_path / "hosts"))
    rec.install()
    eng.run_until(seconds(10))
    rec.close()

    files = sorted(os.listdir(tmp_path / "hosts"))
    assert len(files) == 20
    total = 0
    for name in files:
        _, records = read_pcap(str(tmp_path / "hosts" / name))
        last = (0, 0)
        for ts_sec, ts_usec, incl, orig, wire in records:
            assert (ts_sec, ts_usec) >= last
            last = (ts_sec, ts_usec)
            assert incl == orig == len(wire)
            parse_ip(wire)
        total += len(records)
    # every submitted packet taps the sender, every delivered one the receiver
    expected = sum(net.submitted.values()) + sum(net.delivered.values())
    assert total == expected == rec.total_records()
    assert total > 200
    index = rec.index()
    assert sum(e["records"] for e in index.values()) == total
    assert set(index.keys()) == {name[:-5] for name in files}


def test_single_packet_lands_in_exactly_both_endpoint_pcaps(tmp_path):
    eng, topo, net, ts = build_system(start_sources=False)
    rec = TraceRecorder(net, str(tmp_path / "hosts"))
    rec.install()
    src_addr = topo.plan.address_of(14)
    dst_addr = topo.plan.address_of(7)
    net.submit(udp_pkt(src=src_addr, dst=dst_addr), 14)
    eng.run_until(seconds(1))
    rec.close()
    counts = {name: len(read_pcap(str(tmp_path / "hosts" / name))[1])
              for name in os.listdir(tmp_path / "hosts")}
    assert counts.pop(f"{ip_str(src_addr)}.pcap") == 1
    assert counts.pop(f"{ip_str(dst_addr)}.pcap") == 1
    assert all(c == 0 for c in counts.values())


def test_router_taps_record_transit(tmp_path):
    topo = build_single_as(AsLayout(cores=1, gateways=1, edges=1, hosts=2,
                                    server_mix={"HTTP": 1}))
    eng = Engine(seed=3)
    net = Network(eng, topo, compute_routes(topo))
    ts = TrafficSystem(eng, net, build_mix(MIX_CATEGORY1))
    ts.install(start_sources=False)
    rec = TraceRecorder(net, str(tmp_path / "hosts"), include_routers=True)
    rec.install()
    src_addr = topo.plan.address_of(3)
    dst_addr = topo.plan.address_of(4)
    net.submit(udp_pkt(src=src_addr, dst=dst_addr), 3)
    eng.run_until(seconds(1))
    rec.close()
    # path is host 3 -> edge 2 -> host 4: one record each, none elsewhere
    by_node = {e["node"]: e["records"] for e in rec.index().values()}
    assert by_node[3] == 1 and by_node[2] == 1 and by_node[4] == 1
    assert sum(by_node.values()) == 3


def test_same_seed_runs_hash_identical(tmp_path):
    digests = []
    for sub in ("one", "two"):
        eng, topo, net, ts = build_system(seed=21)
        rec = TraceRecorder(net, str(tmp_path / sub), payload_seed=21)
        rec.install()
        eng.run_until(seconds(5))
        rec.close()
        root = str(tmp_path / sub)
        digests.append(files_digest(root, sorted(os.listdir(root))))
    assert digests[0] == digests[1]

    eng, topo, net, ts = build_system(seed=22)
    rec = TraceRecorder(net, str(tmp_path / "three"), payload_seed=21)
    rec.install()
    eng.run_until(seconds(5))
    rec.close()
    root = str(tmp_path / "three")
    assert files_digest(root, sorted(os.listdir(root))) != digests[0]


# ------------------------------------------------------------ logs/manifest


def test_ground_truth_and_worm_flows_csv(tmp_path):
    recs = [
        InfectionRecord(time_ns=5_000_000, attacker_addr=0x0A000001,
                        victim_addr=0x0A000002, transport="udp",
                        flow_id=148_000_001, src_port=61_500, dst_port=1434),
        InfectionRecord(time_ns=6_000_000, attacker_addr=0x0A000002,
                        victim_addr=0x0A000003, transport="udp",
                        flow_id=248_000_004, src_port=62_000, dst_port=1434),
    ]
    gt = tmp_path / "ground_truth.csv"
    wf = tmp_path / "worm_flows.csv"
    write_ground_truth(str(gt), recs)
    write_worm_flows(str(wf), recs)
    lines = gt.read_text().splitlines()
    assert lines[0] == "time_ns,attacker_ip,victim_ip,transport,flow_id"
    assert lines[1] == "5000000,10.0.0.1,10.0.0.2,udp,148000001"
    assert len(lines) == 3
    wlines = wf.read_text().splitlines()
    assert wlines[0] == "flow_id,src_ip,src_port,dst_ip,dst_port,transport,time_ns"
    assert wlines[2] == "248000004,10.0.0.2,62000,10.0.0.3,1434,udp,6000000"


def test_flow_log_and_series_csv(tmp_path):
    rec = FlowRecord(flow_id=140_000_001, profile="HTTP", transport="tcp",
                     src_node=14, dst_node=9, src_addr=0x0A00000E,
                     dst_addr=0x0A000009, src_port=50_000, dst_port=80,
                     start_ns=0, end_ns=123, request_bytes=500,
                     reply_bytes_expected=1000, reply_bytes_received=1000,
                     status="complete")
    fl = tmp_path / "flows.csv"
    write_flow_log(str(fl), [rec])
    lines = fl.read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("140000001,HTTP,tcp,14,9,10.0.0.14,10.0.0.9,50000,80,")
    assert lines[1].endswith(",complete")

    sr = tmp_path / "series.csv"
    write_series(str(sr), 10_000_000, [100, 200], [90])
    slines = sr.read_text().splitlines()
    assert slines[0] == "bin_start_ns,submitted_bytes,delivered_bytes"
    assert slines[1] == "0,100,90"
    assert slines[2] == "10000000,200,0"


def _stub_run(run_dir, n_hosts=2):
    hosts = run_dir / "hosts"
    hosts.mkdir(parents=True)
    index = {}
    for i in range(n_hosts):
        ip = f"10.0.0.{i + 1}"
        w = open_pcap(str(hosts / f"{ip}.pcap"))
        w.write(udp_pkt(uid=i + 1), 1000 * (i + 1))
        w.close()
        index[ip] = {"node": i, "file": f"{ip}.pcap", "records": 1}
    write_ground_truth(str(run_dir / "ground_truth.csv"), [])
    write_worm_flows(str(run_dir / "worm_flows.csv"), [])
    write_flow_log(str(run_dir / "flows.csv"), [])
    write_series(str(run_dir / "background_series.csv"), 10_000_000, [], [])
    files = {"ground_truth": "ground_truth.csv", "worm_flows": "worm_flows.csv",
             "flow_log": "flows.csv", "background_series": "background_series.csv"}
    return index, files


def test_run_manifest_contents_and_missing_file_error(tmp_path):
    run_dir = tmp_path / "run_1"
    index, files = _stub_run(run_dir)
    path = write_run_manifest(
        str(run_dir), scenario_name="demo", run_index=1, engine_seed=99,
        origin_node=0, origin_addr=0x0A000001, worm_config={"name": "w"},
        topology_ref="../topology.json", pcap_index=index, file_map=files,
        stats={"flows": 0})
    with open(path) as fh:
        m = json.load(fh)
    assert m["schema"] == "wormbench-run-1"
    assert m["origin"] == {"node": 0, "address": "10.0.0.1"}
    assert m["capture_notes"]["linktype"] == 101
    hashed = [os.path.join("hosts", e["file"]) for e in index.values()]
    hashed += list(files.values())
    assert m["determinism_hash"] == files_digest(str(run_dir), hashed)

    os.remove(run_dir / "hosts" / "10.0.0.2.pcap")
    with pytest.raises(CaptureError, match="10.0.0.2.pcap"):
        write_run_manifest(
            str(run_dir), scenario_name="demo", run_index=1, engine_seed=99,
            origin_node=0, origin_addr=0x0A000001, worm_config={},
            topology_ref="../topology.json", pcap_index=index, file_map=files,
            stats={})


def test_dataset_manifest_lists_runs_and_flags_gaps(tmp_path):
    ds = tmp_path / "demo"
    ds.mkdir()
    (ds / "topology.json").write_text("{}\n")
    for k in (1, 2):
        run_dir = ds / f"run_{k}"
        index, files = _stub_run(run_dir)
        write_run_manifest(
            str(run_dir), scenario_name="demo", run_index=k, engine_seed=k,
            origin_node=0, origin_addr=0x0A000001, worm_config={},
            topology_ref="../topology.json", pcap_index=index, file_map=files,
            stats={"flows": k})
    path = finalize_dataset(str(ds), scenario={"name": "demo"}, seed=7,
                            topology_file="topology.json")
    with open(path) as fh:
        m = json.load(fh)
    assert m["schema"] == "wormbench-dataset-1"
    assert [r["dir"] for r in m["runs"]] == ["run_1", "run_2"]
    assert all(len(r["determinism_hash"]) == 64 for r in m["runs"])

    os.remove(ds / "run_2" / "ground_truth.csv")
    with pytest.raises(CaptureError, match="run_2"):
        finalize_dataset(str(ds), scenario={"name": "demo"}, seed=7,
                         topology_file="topology.json")
