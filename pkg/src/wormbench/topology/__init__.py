from .addressing import AddressPlan, IntervalSet, assign_addresses
from .build import (
    AsLayout,
    CATEGORY1_LINKS,
    CATEGORY2_LINKS,
    build_category1,
    build_category2,
    build_pfp_topology,
    build_single_as,
    expand_as,
)
from .model import LinkSpec, Node, Subnet, Topology, TopologyError
from .pfp import PfpParams, generate_pfp
from .routing import Routes, compute_routes

__all__ = [
    "AddressPlan",
    "AsLayout",
    "CATEGORY1_LINKS",
    "CATEGORY2_LINKS",
    "IntervalSet",
    "LinkSpec",
    "Node",
    "PfpParams",
    "Routes",
    "Subnet",
    "Topology",
    "TopologyError",
    "assign_addresses",
    "build_category1",
    "build_category2",
    "build_pfp_topology",
    "build_single_as",
    "compute_routes",
    "expand_as",
    "generate_pfp",
]
