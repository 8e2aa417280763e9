"""Positive-feedback preference growth for AS-level graphs.

Nodes join one at a time; richer nodes attract links superlinearly through the
feedback exponent, which is what produces the heavy power-law tail observed in
AS degree data.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from ..engine import RngStream
from .model import TopologyError


@dataclass(frozen=True)
class PfpParams:
    p: float = 0.3  # step adds one new node with one link
    q: float = 0.1  # step adds one new node with two links
    delta: float = 0.048  # feedback strength in the attachment kernel

    def validate(self) -> None:
        if not (0 <= self.p <= 1 and 0 <= self.q <= 1 and self.p + self.q <= 1):
            raise TopologyError("pfp probabilities must satisfy 0 <= p, q, p+q <= 1")
        if self.delta < 0:
            raise TopologyError("pfp delta must be non-negative")


def _attachment_weights(degrees: np.ndarray, delta: float) -> np.ndarray:
    # preference kernel: k^(1 + delta*log10 k)
    k = degrees.astype(float)
    return k ** (1.0 + delta * np.log10(k))


def _pick(weights: np.ndarray, rng: RngStream, exclude: set[int]) -> int:
    if exclude:
        weights = weights.copy()
        weights[list(exclude)] = 0.0
    total = weights.sum()
    if total <= 0:
        raise TopologyError("no attachment candidates left")
    cum = np.cumsum(weights)
    return int(np.searchsorted(cum, rng.random() * total, side="right"))


def generate_pfp(n_nodes: int, params: PfpParams | None = None, rng: RngStream | None = None) -> nx.Graph:
    """Grow an AS graph of n_nodes from a triangle seed.

    Per step: with probability p a new node joins by one link, with q by two
    links, otherwise two new links are added between an existing host node and
    peers it is not yet connected to. All endpoint choices are preferential.
    """
    params = params or PfpParams()
    params.validate()
    if rng is None:
        raise TopologyError("generate_pfp needs an rng stream")
    if n_nodes < 3:
        raise TopologyError("pfp graphs start from a 3-node seed")

    g = nx.Graph()
    g.add_edges_from([(0, 1), (1, 2), (0, 2)])
    degrees = np.zeros(n_nodes, dtype=np.int64)
    degrees[:3] = 2

    def add_edge(u: int, v: int) -> None:
        g.add_edge(u, v)
        degrees[u] += 1
        degrees[v] += 1

    n = 3
    while n < n_nodes:
        w = _attachment_weights(degrees[:n], params.delta)
        r = rng.random()
        if r < params.p:
            host = _pick(w, rng, set())
            add_edge(n, host)
            n += 1
        elif r < params.p + params.q:
            first = _pick(w, rng, set())
            second = _pick(w, rng, {first})
            add_edge(n, first)
            add_edge(n, second)
            n += 1
        else:
            _add_internal_links(g, degrees, n, params, rng)
    return g


def _add_internal_links(g: nx.Graph, degrees: np.ndarray, n: int, params: PfpParams, rng: RngStream) -> None:
    w = _attachment_weights(degrees[:n], params.delta)
    for _ in range(n):  # bounded retries over host choices
        host = _pick(w, rng, set())
        taken = set(g.neighbors(host))
        taken.add(host)
        if len(taken) >= n:
            w = w.copy()
            w[host] = 0.0  # saturated host, try another
            if w.sum() <= 0:
                return  # complete graph, nothing to add
            continue
        first = _pick(w, rng, taken)
        added = [first]
        taken.add(first)
        if len(taken) < n:
            second = _pick(w, rng, taken)
            added.append(second)
        for peer in added:
            g.add_edge(host, peer)
            degrees[host] += 1
            degrees[peer] += 1
        return
