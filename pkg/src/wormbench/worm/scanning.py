"""Scan target selection: uniform over the range, or locality-preferring."""

from __future__ import annotations

from ..engine import RngStream
from ..topology.addressing import AddressPlan, IntervalSet
from .config import LocalPreferenceScan


def choose_target(plan: AddressPlan, node_id: int, pool: IntervalSet,
                  rng: RngStream, scanning) -> tuple[int, str]:
    """One scan draw for an infected host. Returns (address, scope label).

    Locality classes are taken relative to the scanner's own address: same
    class A = same first octet, same class B = same first two octets, same
    subnet per the address plan. A class with no scannable addresses falls
    back to a fully random draw, labeled "fallback" so callers can count it.
    """
    if isinstance(scanning, LocalPreferenceScan):
        scope = scanning.draw_class(rng)
    else:
        scope = "random"
    if scope == "random":
        return pool.draw(rng), "random"

    addr = plan.address_of(node_id)
    if scope == "class_a":
        lo, hi = plan.class_a_interval(addr)
    elif scope == "class_b":
        lo, hi = plan.class_b_interval(addr)
    else:
        lo, hi = plan.subnet_interval(node_id)
    local = pool.intersect(lo, hi)
    if not local:
        return pool.draw(rng), "fallback"
    return local.draw(rng), scope
