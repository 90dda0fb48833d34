import itertools

import numpy as np
import pytest

from secvne.embedding import NodeMapper
from secvne.network import SubstrateNetwork, VirtualLink, VirtualNode, VirtualRequest, feasible_mask

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_net(n, links, cpu=50, sto=50, sl=3, bw=50):
    def expand(x, k):
        return list(x) if isinstance(x, (list, tuple)) else [x] * k

    return SubstrateNetwork(expand(cpu, n), expand(sto, n), expand(sl, n), links, expand(bw, len(links)))


def make_request(rid, nodes, links, arrival=0.0, lifetime=10.0):
    """nodes: (cpu, sto, sr) triples; links: (a, b, bw) triples."""
    return VirtualRequest(
        rid,
        [VirtualNode(i, c, s, r) for i, (c, s, r) in enumerate(nodes)],
        [VirtualLink((a, b), bw) for a, b, bw in links],
        arrival,
        lifetime,
    )


class RandomMapper(NodeMapper):
    """Uniform choice among feasible unused nodes; exercises the engine without bias."""

    name = "random"

    def __init__(self, rng):
        self.rng = rng

    def choose(self, net, vnr, node_map, vi):
        cand = np.flatnonzero(feasible_mask(net, vnr.nodes[vi], node_map.values()))
        if cand.size == 0:
            return None
        return int(self.rng.choice(cand))


def random_connected_net(rng, n, p=0.5, cpu=(0, 100), sto=(0, 100), bw=(0, 100), sl=(0, 3)):
    while True:
        links = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
        net = SubstrateNetwork(
            rng.integers(cpu[0], cpu[1] + 1, n),
            rng.integers(sto[0], sto[1] + 1, n),
            rng.integers(sl[0], sl[1] + 1, n),
            links,
            rng.integers(bw[0], bw[1] + 1, len(links)),
        )
        if net.is_connected():
            return net


def random_request(rng, rid, n_range=(2, 4), cpu=(0, 50), sto=(0, 50), bw=(0, 50), sr=(0, 3), extra=0.5):
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    order = rng.permutation(n).tolist()
    edges = set()
    for i in range(1, n):
        a, b = order[i], order[int(rng.integers(0, i))]
        edges.add((min(a, b), max(a, b)))
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < extra:
            edges.add((a, b))
    nodes = [(int(rng.integers(cpu[0], cpu[1] + 1)), int(rng.integers(sto[0], sto[1] + 1)),
              int(rng.integers(sr[0], sr[1] + 1))) for _ in range(n)]
    links = [(a, b, int(rng.integers(bw[0], bw[1] + 1))) for a, b in sorted(edges)]
    return make_request(rid, nodes, links)


def bfs_hops(net, src):
    """Plain BFS hop counts from src; independent of the library's routines."""
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for (a, b) in net.endpoints:
                for x, y in ((a, b), (b, a)):
                    if x == u and y not in dist:
                        dist[y] = dist[u] + 1
                        nxt.append(y)
        frontier = nxt
    return dist


def all_simple_link_paths(net, src, dst, demand):
    """Every simple path from src to dst over links with residual >= demand, by DFS."""
    out = []

    def dfs(u, visited, links):
        if u == dst:
            out.append(list(links))
            return
        for l, (a, b) in enumerate(net.endpoints):
            if net.bw_capacity[l] - net.bw_used[l] < demand:
                continue
            if u in (a, b):
                v = b if u == a else a
                if v not in visited:
                    visited.add(v)
                    links.append(l)
                    dfs(v, visited, links)
                    links.pop()
                    visited.remove(v)

    dfs(src, {src}, [])
    return out


@pytest.fixture
def triangle():
    return make_net(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3():
    return make_net(3, [(0, 1), (1, 2)])
