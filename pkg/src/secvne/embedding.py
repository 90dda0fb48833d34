"""Embedding lifecycle: node mapping via a pluggable strategy, BFS link mapping,
atomic commit/rollback and release. Also the exhaustive small-instance oracle."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .network import (
    ContractViolation,
    StateError,
    SubstrateNetwork,
    VirtualRequest,
    node_feasible,
    path_nodes,
)

NO_FEASIBLE_NODE = "no-feasible-node"
NO_FEASIBLE_PATH = "no-feasible-path"

ORACLE_MAX_VIRTUAL_NODES = 4
ORACLE_MAX_SUBSTRATE_NODES = 8


class EmbeddingRejected(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass
class Embedding:
    request_id: int
    node_map: dict[int, int]
    # one substrate link path per virtual link, indexed like vnr.links
    link_paths: list[list[int]]
    revenue: int = 0
    cost: int = 0
    node_demands: dict[int, tuple[int, int]] = field(default_factory=dict, repr=False)
    link_demands: list[int] = field(default_factory=list, repr=False)


def revenue_of(vnr: VirtualRequest) -> int:
    return sum(vn.cpu_demand + vn.sto_demand for vn in vnr.nodes) + sum(vl.bw_demand for vl in vnr.links)


def cost_of(vnr: VirtualRequest, link_paths: Sequence[Sequence[int]]) -> int:
    node_part = sum(vn.cpu_demand + vn.sto_demand for vn in vnr.nodes)
    return node_part + sum(vl.bw_demand * len(p) for vl, p in zip(vnr.links, link_paths))


class NodeMapper:
    """Strategy seam for node selection.

    Subclasses implement :meth:`choose`. Link ordering and routing default to
    declaration order and BFS; baselines override them.
    """

    name = "mapper"

    def start(self, net: SubstrateNetwork, vnr: VirtualRequest) -> None:
        pass

    def choose(self, net: SubstrateNetwork, vnr: VirtualRequest, node_map: dict[int, int], vi: int) -> Optional[int]:
        raise NotImplementedError

    def link_order(self, vnr: VirtualRequest) -> Sequence[int]:
        return range(len(vnr.links))

    def route(self, net: SubstrateNetwork, src: int, dst: int, demand: int) -> Optional[list[int]]:
        return bfs_link_map(net, src, dst, demand)


def _usable_links(net: SubstrateNetwork, demand: int) -> list[bool]:
    return (net.bw_capacity - net.bw_used >= demand).tolist()


def bfs_link_map(net: SubstrateNetwork, src: int, dst: int, demand: int, usable: list[bool] | None = None) -> Optional[list[int]]:
    """Minimum-hop path of link indices over links with residual >= demand, or None."""
    if src == dst:
        raise ContractViolation("bfs_link_map needs distinct endpoints")
    ok = _usable_links(net, demand) if usable is None else usable
    adj = net.adjacency
    parent: dict[int, tuple[int, int]] = {src: (-1, -1)}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v, l in adj[u]:
            if ok[l] and v not in parent:
                parent[v] = (u, l)
                if v == dst:
                    path = []
                    while v != src:
                        v, l = parent[v]
                        path.append(l)
                    path.reverse()
                    return path
                queue.append(v)
    return None


def _check_embedding(net: SubstrateNetwork, vnr: VirtualRequest, emb: Embedding) -> None:
    """Independent re-verification of every node and link constraint."""
    targets = list(emb.node_map.values())
    if sorted(emb.node_map) != list(range(len(vnr.nodes))):
        raise ContractViolation(f"request {vnr.request_id}: node map does not cover every virtual node")
    if len(set(targets)) != len(targets):
        raise ContractViolation(f"request {vnr.request_id}: node map is not injective")
    for vi, sn in emb.node_map.items():
        if not node_feasible(net, sn, vnr.nodes[vi]):
            raise ContractViolation(f"request {vnr.request_id}: node {vi} infeasible on substrate {sn}")
    if len(emb.link_paths) != len(vnr.links):
        raise ContractViolation(f"request {vnr.request_id}: link path count mismatch")
    load: dict[int, int] = {}
    for vl, path in zip(vnr.links, emb.link_paths):
        a, b = vl.endpoints
        seq = path_nodes(net, path, start=emb.node_map[a])
        if seq[-1] != emb.node_map[b]:
            raise ContractViolation(f"request {vnr.request_id}: path for {vl.endpoints} ends at wrong node")
        for l in path:
            load[l] = load.get(l, 0) + vl.bw_demand
    for l, amount in load.items():
        if net.bw_capacity[l] - net.bw_used[l] < amount:
            raise ContractViolation(f"request {vnr.request_id}: link {l} lacks bandwidth")


def commit(net: SubstrateNetwork, emb: Embedding, vnr: VirtualRequest) -> None:
    if emb.request_id in net.active:
        raise StateError(f"request {emb.request_id} is already committed")
    _check_embedding(net, vnr, emb)
    emb.node_demands = {sn: (vnr.nodes[vi].cpu_demand, vnr.nodes[vi].sto_demand) for vi, sn in emb.node_map.items()}
    emb.link_demands = [vl.bw_demand for vl in vnr.links]
    for sn, (c, s) in emb.node_demands.items():
        net.cpu_used[sn] += c
        net.sto_used[sn] += s
    for path, d in zip(emb.link_paths, emb.link_demands):
        for l in path:
            net.bw_used[l] += d
    emb.revenue = revenue_of(vnr)
    emb.cost = cost_of(vnr, emb.link_paths)
    net.active[emb.request_id] = emb


def release(net: SubstrateNetwork, emb: Embedding | int) -> None:
    rid = emb if isinstance(emb, int) else emb.request_id
    stored = net.active.pop(rid, None)
    if stored is None:
        raise StateError(f"request {rid} is not active")
    for sn, (c, s) in stored.node_demands.items():
        net.cpu_used[sn] -= c
        net.sto_used[sn] -= s
    for path, d in zip(stored.link_paths, stored.link_demands):
        for l in path:
            net.bw_used[l] -= d


class _Tentative:
    """Reversible reservations made while an embedding is being built."""

    def __init__(self, net: SubstrateNetwork):
        self.net = net
        self.nodes: list[tuple[int, int, int]] = []
        self.links: list[tuple[list[int], int]] = []

    def node(self, sn, cpu, sto):
        self.net.cpu_used[sn] += cpu
        self.net.sto_used[sn] += sto
        self.nodes.append((sn, cpu, sto))

    def path(self, path, demand):
        for l in path:
            self.net.bw_used[l] += demand
        self.links.append((path, demand))

    def undo(self):
        for path, demand in reversed(self.links):
            for l in path:
                self.net.bw_used[l] -= demand
        for sn, cpu, sto in reversed(self.nodes):
            self.net.cpu_used[sn] -= cpu
            self.net.sto_used[sn] -= sto
        self.links.clear()
        self.nodes.clear()


def embed_request(net: SubstrateNetwork, vnr: VirtualRequest, mapper: NodeMapper) -> Embedding:
    """Map nodes with ``mapper``, route links, then commit.

    Raises EmbeddingRejected on failure; the network is left exactly as it was.
    Node demands are reserved as each node is placed so that later choices in
    the same request see the updated residuals.
    """
    tentative = _Tentative(net)
    node_map: dict[int, int] = {}
    try:
        mapper.start(net, vnr)
        for vi, vn in enumerate(vnr.nodes):
            sn = mapper.choose(net, vnr, node_map, vi)
            if sn is None:
                raise EmbeddingRejected(NO_FEASIBLE_NODE, f"virtual node {vi}")
            sn = int(sn)
            if sn in node_map.values() or not node_feasible(net, sn, vn):
                raise ContractViolation(f"{mapper.name} returned unusable node {sn} for virtual node {vi}")
            node_map[vi] = sn
            tentative.node(sn, vn.cpu_demand, vn.sto_demand)
        paths: list[Optional[list[int]]] = [None] * len(vnr.links)
        for li in mapper.link_order(vnr):
            vl = vnr.links[li]
            a, b = vl.endpoints
            path = mapper.route(net, node_map[a], node_map[b], vl.bw_demand)
            if path is None:
                raise EmbeddingRejected(NO_FEASIBLE_PATH, f"virtual link {vl.endpoints}")
            paths[li] = path
            tentative.path(path, vl.bw_demand)
    finally:
        tentative.undo()
    emb = Embedding(vnr.request_id, node_map, paths)
    commit(net, emb, vnr)
    return emb


def _route_all(net: SubstrateNetwork, vnr: VirtualRequest, node_map, remaining: list[int], paths: dict[int, list[int]]) -> bool:
    # depth-first over link orderings; shared prefixes are routed once
    if not remaining:
        return True
    for idx, li in enumerate(remaining):
        vl = vnr.links[li]
        a, b = vl.endpoints
        path = bfs_link_map(net, node_map[a], node_map[b], vl.bw_demand)
        if path is None:
            continue
        for l in path:
            net.bw_used[l] += vl.bw_demand
        paths[li] = path
        ok = _route_all(net, vnr, node_map, remaining[:idx] + remaining[idx + 1:], paths)
        for l in path:
            net.bw_used[l] -= vl.bw_demand
        if ok:
            return True
        del paths[li]
    return False


def brute_force_feasible(net: SubstrateNetwork, vnr: VirtualRequest) -> tuple[bool, Optional[Embedding]]:
    """Exhaustive check over injective node maps and link routing orders.

    Works on a private copy; only for tiny instances.
    """
    if len(vnr.nodes) > ORACLE_MAX_VIRTUAL_NODES or net.num_nodes > ORACLE_MAX_SUBSTRATE_NODES:
        raise ContractViolation(
            f"oracle limited to {ORACLE_MAX_VIRTUAL_NODES} virtual / {ORACLE_MAX_SUBSTRATE_NODES} substrate nodes"
        )
    work = net.copy()
    candidates = [
        [sn for sn in range(work.num_nodes) if node_feasible(work, sn, vn)] for vn in vnr.nodes
    ]
    for combo in itertools.permutations(range(work.num_nodes), len(vnr.nodes)):
        if any(sn not in cand for sn, cand in zip(combo, candidates)):
            continue
        node_map = dict(enumerate(combo))
        for vi, sn in node_map.items():
            work.cpu_used[sn] += vnr.nodes[vi].cpu_demand
            work.sto_used[sn] += vnr.nodes[vi].sto_demand
        # cheap necessary condition: each link routable on its own
        routable = all(
            bfs_link_map(work, node_map[vl.endpoints[0]], node_map[vl.endpoints[1]], vl.bw_demand) is not None
            for vl in vnr.links
        )
        paths: dict[int, list[int]] = {}
        found = routable and _route_all(work, vnr, node_map, list(range(len(vnr.links))), paths)
        for vi, sn in node_map.items():
            work.cpu_used[sn] -= vnr.nodes[vi].cpu_demand
            work.sto_used[sn] -= vnr.nodes[vi].sto_demand
        if found:
            link_paths = [paths[i] for i in range(len(vnr.links))]
            return True, Embedding(
                vnr.request_id, node_map, link_paths, revenue_of(vnr), cost_of(vnr, link_paths)
            )
    return False, None
