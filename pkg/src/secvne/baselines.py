"""Heuristic node mappers used as comparison points.

``greedy`` ranks candidates by residual CPU times adjacent residual bandwidth
and routes with BFS. The two TOPSIS presets rank by degree, closeness,
resource capability and (for the trust-aware preset) security level, route the
largest bandwidth demands first and walk k-shortest paths.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Collection, Iterator, Optional

import numpy as np

from .embedding import NodeMapper, bfs_link_map
from .features import floyd_warshall
from .network import SubstrateNetwork, VirtualNode, feasible_mask, path_feasible, path_nodes


def adjacent_bandwidth(net: SubstrateNetwork) -> np.ndarray:
    """Sum of residual bandwidth over each node's incident links."""
    res = net.residual_bw_all().astype(float)
    n = net.num_nodes
    if not net.endpoints:
        return np.zeros(n)
    ends = np.asarray(net.endpoints)
    return np.bincount(ends[:, 0], res, n) + np.bincount(ends[:, 1], res, n)


def _argmax_lowest(values: np.ndarray, candidates: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest candidate index
    return int(candidates[np.argmax(values[candidates])])


def greedy_rank(net: SubstrateNetwork, vn: VirtualNode, used: Collection[int]) -> Optional[int]:
    cand = np.flatnonzero(feasible_mask(net, vn, used))
    if cand.size == 0:
        return None
    rank = net.residual_cpu_all().astype(float) * adjacent_bandwidth(net)
    return _argmax_lowest(rank, cand)


@dataclass(frozen=True)
class RankingCriteria:
    """Criterion weights, in order (degree, closeness, resource, security)."""

    degree: float = 1.0
    closeness: float = 1.0
    resource: float = 1.0
    security: float = 0.0

    def __post_init__(self):
        w = self.weights
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError("criterion weights must be non-negative and not all zero")

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.degree, self.closeness, self.resource, self.security], dtype=float)


# trust-aware ranks security as a fourth benefit criterion; the other preset ignores it
TOPSIS_TA = RankingCriteria(1.0, 1.0, 1.0, 1.0)
TOPSIS_NTA = RankingCriteria(1.0, 1.0, 1.0, 0.0)


def criteria_matrix(net: SubstrateNetwork, dist: np.ndarray) -> np.ndarray:
    """Rows: nodes. Columns: degree centrality, closeness centrality,
    resource capability, security level."""
    n = net.num_nodes
    degree = np.array([len(a) for a in net.adjacency], dtype=float) / max(n - 1, 1)
    finite = np.where(np.isfinite(dist), dist, 0.0)
    total = finite.sum(axis=1)
    closeness = np.divide(n - 1, total, out=np.zeros(n), where=total > 0)
    resource = net.residual_cpu_all() + net.residual_sto_all() + adjacent_bandwidth(net)
    return np.column_stack([degree, closeness, resource, net.security_level.astype(float)])


def topsis_closeness(matrix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Relative closeness d-/(d+ + d-) with min-max normalized benefit criteria.

    A constant criterion normalizes to 0.5 and so does not separate
    alternatives. When d+ + d- is zero the closeness is 1.
    """
    lo = matrix.min(axis=0)
    span = matrix.max(axis=0) - lo
    flat = span == 0
    norm = (matrix - lo) / np.where(flat, 1.0, span)
    norm[:, flat] = 0.5
    weighted = norm * weights
    best = weighted.max(axis=0)
    worst = weighted.min(axis=0)
    d_best = np.sqrt(((weighted - best) ** 2).sum(axis=1))
    d_worst = np.sqrt(((weighted - worst) ** 2).sum(axis=1))
    denom = d_best + d_worst
    return np.divide(d_worst, denom, out=np.ones(len(matrix)), where=denom > 0)


def topsis_rank(net: SubstrateNetwork, vn: VirtualNode, used: Collection[int], criteria: RankingCriteria,
                dist: np.ndarray | None = None) -> Optional[int]:
    cand = np.flatnonzero(feasible_mask(net, vn, used))
    if cand.size == 0:
        return None
    if dist is None:
        dist = floyd_warshall(net)
    matrix = criteria_matrix(net, dist)[cand]
    closeness = topsis_closeness(matrix, criteria.weights)
    return int(cand[np.argmax(closeness)])


def shortest_simple_paths(net: SubstrateNetwork, src: int, dst: int, demand: int) -> Iterator[list[int]]:
    """Loop-free link paths in non-decreasing hop count (Yen's method) over
    links whose residual bandwidth covers ``demand``. Lazy: each further path
    is only computed when requested."""
    usable = (net.residual_bw_all() >= demand).tolist()
    first = bfs_link_map(net, src, dst, demand, usable=usable)
    if first is None:
        return
    found = [first]
    found_nodes = [path_nodes(net, first, src)]
    seen = {tuple(found_nodes[0])}
    heap: list = []
    yield first
    while True:
        prev_links, prev_nodes = found[-1], found_nodes[-1]
        for i in range(len(prev_nodes) - 1):
            spur = prev_nodes[i]
            root = prev_nodes[: i + 1]
            allowed = list(usable)
            for links, nodes in zip(found, found_nodes):
                if nodes[: i + 1] == root:
                    allowed[links[i]] = False
            for rn in root[:-1]:
                for _, l in net.adjacency[rn]:
                    allowed[l] = False
            spur_path = bfs_link_map(net, spur, dst, demand, usable=allowed)
            if spur_path is None:
                continue
            total = prev_links[:i] + spur_path
            nodes = tuple(path_nodes(net, total, src))
            if nodes in seen:
                continue
            seen.add(nodes)
            heapq.heappush(heap, (len(total), nodes, total))
        if not heap:
            return
        _, nodes, links = heapq.heappop(heap)
        found.append(links)
        found_nodes.append(list(nodes))
        yield links


def k_shortest_paths(net: SubstrateNetwork, src: int, dst: int, k: int, demand: int) -> list[list[int]]:
    if k < 1:
        raise ValueError("k must be at least 1")
    if src == dst:
        raise ValueError("k_shortest_paths needs distinct endpoints")
    return list(itertools.islice(shortest_simple_paths(net, src, dst, demand), k))


class GreedyMapper(NodeMapper):
    name = "greedy"

    def choose(self, net, vnr, node_map, vi):
        return greedy_rank(net, vnr.nodes[vi], node_map.values())


class TopsisMapper(NodeMapper):
    def __init__(self, net: SubstrateNetwork, criteria: RankingCriteria, name: str, k: int = 3):
        self.criteria = criteria
        self.name = name
        self.k = k
        self.dist = floyd_warshall(net)

    def choose(self, net, vnr, node_map, vi):
        return topsis_rank(net, vnr.nodes[vi], node_map.values(), self.criteria, self.dist)

    def link_order(self, vnr):
        # largest bandwidth demand first, declaration order among equals
        return sorted(range(len(vnr.links)), key=lambda i: -vnr.links[i].bw_demand)

    def route(self, net, src, dst, demand):
        for path in itertools.islice(shortest_simple_paths(net, src, dst, demand), self.k):
            if path_feasible(net, path, demand):
                return path
        return None


BASELINES = ("greedy", "topsis-ta", "topsis-nta")


def make_baseline(name: str, net: SubstrateNetwork) -> NodeMapper:
    if name == "greedy":
        return GreedyMapper()
    if name == "topsis-ta":
        return TopsisMapper(net, TOPSIS_TA, name)
    if name == "topsis-nta":
        return TopsisMapper(net, TOPSIS_NTA, name)
    raise ValueError(f"unknown baseline {name!r}")
