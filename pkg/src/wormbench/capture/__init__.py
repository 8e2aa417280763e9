from .manifest import (
    FLOW_LOG_HEADER,
    GROUND_TRUTH_HEADER,
    SERIES_HEADER,
    WORM_FLOWS_HEADER,
    files_digest,
    finalize_dataset,
    write_flow_log,
    write_ground_truth,
    write_run_manifest,
    write_series,
    write_worm_flows,
)
from .pcap import (
    LINKTYPE_RAW_IPV4,
    PCAP_MAGIC,
    SNAPLEN,
    CaptureError,
    PcapWriter,
    open_pcap,
    read_pcap,
    write_packet,
)
from .recorder import TraceRecorder, capture_points

__all__ = [
    "CaptureError",
    "FLOW_LOG_HEADER",
    "GROUND_TRUTH_HEADER",
    "LINKTYPE_RAW_IPV4",
    "PCAP_MAGIC",
    "PcapWriter",
    "SERIES_HEADER",
    "SNAPLEN",
    "TraceRecorder",
    "WORM_FLOWS_HEADER",
    "capture_points",
    "files_digest",
    "finalize_dataset",
    "open_pcap",
    "read_pcap",
    "write_flow_log",
    "write_ground_truth",
    "write_packet",
    "write_run_manifest",
    "write_series",
    "write_worm_flows",
]
