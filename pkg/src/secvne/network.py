"""Substrate and virtual network types, residual-resource ledgers and feasibility checks."""

from __future__ import annotations

import pickle
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SECURITY_LEVELS = (0, 1, 2, 3)


class ContractViolation(ValueError):
    """An operation was called outside its documented preconditions."""


class StateError(RuntimeError):
    """Ledger misuse, e.g. releasing an embedding that is not active."""


@dataclass(frozen=True)
class SubstrateNode:
    id: int
    cpu_capacity: int
    sto_capacity: int
    security_level: int
    cpu_used: int = 0
    sto_used: int = 0


@dataclass(frozen=True)
class SubstrateLink:
    id: int
    endpoints: tuple[int, int]
    bw_capacity: int
    bw_used: int = 0


class SubstrateNetwork:
    """Undirected capacitated substrate graph.

    Capacities and usage are kept as integer numpy arrays so that the
    feature extractor can read residuals without per-node Python loops.
    ``adjacency[u]`` lists ``(neighbor, link_index)`` pairs sorted by
    neighbor index, which fixes the BFS tie-break order.
    """

    def __init__(
        self,
        cpu: Sequence[int],
        sto: Sequence[int],
        security: Sequence[int],
        links: Iterable[tuple[int, int]],
        bw: Sequence[int],
    ):
        self.cpu_capacity = np.asarray(cpu, dtype=np.int64).copy()
        self.sto_capacity = np.asarray(sto, dtype=np.int64).copy()
        self.security_level = np.asarray(security, dtype=np.int64).copy()
        n = len(self.cpu_capacity)
        if not (len(self.sto_capacity) == len(self.security_level) == n):
            raise ValueError("node attribute arrays differ in length")
        if n and (self.security_level.min() < 0 or self.security_level.max() > 3):
            raise ValueError("security levels must lie in {0,1,2,3}")

        self.endpoints: list[tuple[int, int]] = []
        self.link_index: dict[tuple[int, int], int] = {}
        for u, v in links:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"link ({u}, {v}) references a missing node")
            key = (min(u, v), max(u, v))
            if key in self.link_index:
                raise ValueError(f"parallel link {key}")
            self.link_index[key] = len(self.endpoints)
            self.endpoints.append(key)
        self.bw_capacity = np.asarray(bw, dtype=np.int64).copy()
        if len(self.bw_capacity) != len(self.endpoints):
            raise ValueError("bandwidth array does not match link count")

        self.cpu_used = np.zeros(n, dtype=np.int64)
        self.sto_used = np.zeros(n, dtype=np.int64)
        self.bw_used = np.zeros(len(self.endpoints), dtype=np.int64)

        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for li, (u, v) in enumerate(self.endpoints):
            adj[u].append((v, li))
            adj[v].append((u, li))
        self.adjacency = [sorted(a) for a in adj]
        # request_id -> Embedding, maintained by embedding.commit/release
        self.active: dict = {}

    @property
    def num_nodes(self) -> int:
        return len(self.cpu_capacity)

    @property
    def num_links(self) -> int:
        return len(self.endpoints)

    @property
    def nodes(self) -> list[SubstrateNode]:
        return [self.node(i) for i in range(self.num_nodes)]

    @property
    def links(self) -> list[SubstrateLink]:
        return [self.link(i) for i in range(self.num_links)]

    def node(self, i: int) -> SubstrateNode:
        _check_index(i, self.num_nodes, "node")
        return SubstrateNode(
            i,
            int(self.cpu_capacity[i]),
            int(self.sto_capacity[i]),
            int(self.security_level[i]),
            int(self.cpu_used[i]),
            int(self.sto_used[i]),
        )

    def link(self, i: int) -> SubstrateLink:
        _check_index(i, self.num_links, "link")
        return SubstrateLink(i, self.endpoints[i], int(self.bw_capacity[i]), int(self.bw_used[i]))

    def link_between(self, u: int, v: int) -> int | None:
        return self.link_index.get((min(u, v), max(u, v)))

    def neighbors(self, u: int) -> list[int]:
        return [v for v, _ in self.adjacency[u]]

    def is_connected(self) -> bool:
        n = self.num_nodes
        if n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, _ in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == n

    def residual_cpu_all(self) -> np.ndarray:
        return self.cpu_capacity - self.cpu_used

    def residual_sto_all(self) -> np.ndarray:
        return self.sto_capacity - self.sto_used

    def residual_bw_all(self) -> np.ndarray:
        return self.bw_capacity - self.bw_used

    def reset(self) -> None:
        """Drop every active embedding and zero all ledgers."""
        self.cpu_used[:] = 0
        self.sto_used[:] = 0
        self.bw_used[:] = 0
        self.active.clear()

    def copy(self) -> "SubstrateNetwork":
        other = SubstrateNetwork(
            self.cpu_capacity, self.sto_capacity, self.security_level, self.endpoints, self.bw_capacity
        )
        other.cpu_used[:] = self.cpu_used
        other.sto_used[:] = self.sto_used
        other.bw_used[:] = self.bw_used
        other.active = dict(self.active)
        return other

    def snapshot(self) -> bytes:
        """Serialized mutable state; equal bytes mean identical ledgers and active set."""
        state = (
            self.cpu_used.tobytes(),
            self.sto_used.tobytes(),
            self.bw_used.tobytes(),
            sorted(self.active),
        )
        return pickle.dumps(state, protocol=4)


@dataclass(frozen=True)
class VirtualNode:
    id: int
    cpu_demand: int
    sto_demand: int
    security_requirement: int


@dataclass(frozen=True)
class VirtualLink:
    endpoints: tuple[int, int]
    bw_demand: int


@dataclass
class VirtualRequest:
    request_id: int
    nodes: list[VirtualNode]
    links: list[VirtualLink]
    arrival_time: float
    lifetime: float = 1.0

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError(f"request {self.request_id} has fewer than 2 nodes")
        if self.lifetime <= 0:
            raise ValueError(f"request {self.request_id} has non-positive lifetime")
        for vn in self.nodes:
            if vn.cpu_demand < 0 or vn.sto_demand < 0:
                raise ValueError(f"request {self.request_id}: negative node demand")
            if vn.security_requirement not in SECURITY_LEVELS:
                raise ValueError(f"request {self.request_id}: bad security requirement")
        for vl in self.links:
            a, b = vl.endpoints
            if a == b or not (0 <= a < len(self.nodes) and 0 <= b < len(self.nodes)):
                raise ValueError(f"request {self.request_id}: bad link {vl.endpoints}")
            if vl.bw_demand < 0:
                raise ValueError(f"request {self.request_id}: negative bandwidth demand")

    @property
    def departure_time(self) -> float:
        return self.arrival_time + self.lifetime

    def is_connected(self) -> bool:
        n = len(self.nodes)
        adj: list[list[int]] = [[] for _ in range(n)]
        for vl in self.links:
            a, b = vl.endpoints
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        stack = [0]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == n


def _check_index(i, n: int, what: str) -> None:
    if not isinstance(i, (int, np.integer)) or not 0 <= i < n:
        raise IndexError(f"{what} index {i!r} out of range [0, {n})")


def residual_cpu(net: SubstrateNetwork, n: int) -> int:
    _check_index(n, net.num_nodes, "node")
    return int(net.cpu_capacity[n] - net.cpu_used[n])


def residual_sto(net: SubstrateNetwork, n: int) -> int:
    _check_index(n, net.num_nodes, "node")
    return int(net.sto_capacity[n] - net.sto_used[n])


def residual_bw(net: SubstrateNetwork, l: int) -> int:
    _check_index(l, net.num_links, "link")
    return int(net.bw_capacity[l] - net.bw_used[l])


def node_feasible(net: SubstrateNetwork, sn: int, vn: VirtualNode) -> bool:
    return (
        residual_cpu(net, sn) >= vn.cpu_demand
        and residual_sto(net, sn) >= vn.sto_demand
        and int(net.security_level[sn]) >= vn.security_requirement
    )


def feasible_mask(net: SubstrateNetwork, vn: VirtualNode, used: Iterable[int] = ()) -> np.ndarray:
    """Vectorized node_feasible over all substrate nodes, excluding ``used``."""
    mask = (
        (net.cpu_capacity - net.cpu_used >= vn.cpu_demand)
        & (net.sto_capacity - net.sto_used >= vn.sto_demand)
        & (net.security_level >= vn.security_requirement)
    )
    for u in used:
        mask[u] = False
    return mask


def path_nodes(net: SubstrateNetwork, path: Sequence[int], start: int | None = None) -> list[int]:
    """Node sequence visited by a link path; raises if the links do not chain into a simple path."""
    if not path:
        return [] if start is None else [start]
    for l in path:
        _check_index(l, net.num_links, "link")
    first = net.endpoints[path[0]]
    if start is None:
        if len(path) == 1:
            start = first[0]
        else:
            nxt = net.endpoints[path[1]]
            start = first[0] if first[1] in nxt else first[1]
    if start not in first:
        raise ContractViolation(f"path does not start at node {start}")
    seq = [start]
    cur = start
    for l in path:
        u, v = net.endpoints[l]
        if cur == u:
            cur = v
        elif cur == v:
            cur = u
        else:
            raise ContractViolation(f"link {l} is not adjacent to node {cur}; path is disconnected")
        seq.append(cur)
    if len(set(seq)) != len(seq):
        raise ContractViolation("path revisits a node")
    return seq


def path_feasible(net: SubstrateNetwork, path: Sequence[int], demand: int) -> bool:
    path_nodes(net, path)
    return all(residual_bw(net, l) >= demand for l in path)
