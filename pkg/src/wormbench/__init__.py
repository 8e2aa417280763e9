"""wormbench: deterministic packet-level generator of worm-propagation benchmark datasets.

Simulates self-similar background traffic and a scanning worm on one shared
link/queue substrate, and exports per-node pcap traces plus infection ground
truth suitable for evaluating origin-identification methods.
"""

__version__ = "0.1.0"

from .engine import Engine, Event, EventKind, Link, RngStream
from .packets import Packet

__all__ = ["Engine", "Event", "EventKind", "Link", "RngStream", "Packet", "__version__"]
