"""Static hop-count shortest-path routing with lowest-neighbor-id tie-break."""

from __future__ import annotations

from collections import deque

from .model import Topology, TopologyError


class Routes:
    """Next-hop tables. Host routes collapse onto their attachment router."""

    def __init__(self, topology: Topology):
        self.topology = topology
        routers = [n.id for n in topology.nodes if n.is_router]
        self.router_index = {rid: i for i, rid in enumerate(routers)}
        self.routers = routers
        adj = topology.adjacency

        self.host_router: dict[int, int] = {}
        for n in topology.nodes:
            if n.is_host:
                neighbors = adj[n.id]
                router_neighbors = [x for x in neighbors if topology.nodes[x].is_router]
                if len(router_neighbors) != 1:
                    raise TopologyError(f"host {n.id} must attach to exactly one router")
                self.host_router[n.id] = router_neighbors[0]

        router_adj = {
            rid: [x for x in adj[rid] if topology.nodes[x].is_router] for rid in routers
        }

        # table[dst_idx][cur_idx] = next router on the path cur -> dst
        self._table: list[list[int]] = []
        for dst in routers:
            dist = {dst: 0}
            q = deque([dst])
            while q:
                cur = q.popleft()
                d = dist[cur] + 1
                for nbr in router_adj[cur]:
                    if nbr not in dist:
                        dist[nbr] = d
                        q.append(nbr)
            if len(dist) != len(routers):
                raise TopologyError("router graph is disconnected")
            row = [0] * len(routers)
            for cur in routers:
                if cur == dst:
                    row[self.router_index[cur]] = cur
                    continue
                dcur = dist[cur]
                nh = min(x for x in router_adj[cur] if dist[x] == dcur - 1)
                row[self.router_index[cur]] = nh
            self._table.append(row)

    def attachment(self, host_id: int) -> int:
        return self.host_router[host_id]

    def next_hop(self, cur: int, dst: int) -> int:
        """Next node on the path from cur toward dst. cur != dst."""
        if cur == dst:
            raise TopologyError("next_hop called with cur == dst")
        hr = self.host_router
        if cur in hr:
            return hr[cur]
        target = hr.get(dst, dst)
        if target == cur:
            return dst  # dst is a host hanging off this router
        return self._table[self.router_index[target]][self.router_index[cur]]

    def path(self, src: int, dst: int) -> list[int]:
        """Full node path src..dst inclusive."""
        path = [src]
        cur = src
        limit = len(self.topology.nodes) + 1
        while cur != dst:
            cur = self.next_hop(cur, dst)
            path.append(cur)
            if len(path) > limit:
                raise TopologyError(f"routing loop between {src} and {dst}")
        return path


def compute_routes(topology: Topology) -> Routes:
    if not topology.is_connected():
        raise TopologyError("topology is disconnected")
    return Routes(topology)
