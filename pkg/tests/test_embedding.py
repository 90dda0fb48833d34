import numpy as np
import pytest

from secvne.baselines import GreedyMapper
from secvne.embedding import (
    NO_FEASIBLE_NODE,
    NO_FEASIBLE_PATH,
    Embedding,
    EmbeddingRejected,
    NodeMapper,
    bfs_link_map,
    brute_force_feasible,
    commit,
    embed_request,
    release,
)
from secvne.network import ContractViolation, StateError, path_nodes

from conftest import (
    RandomMapper,
    all_simple_link_paths,
    make_net,
    make_request,
    random_connected_net,
    random_request,
)


def two_node_request(rid=0, sr=1, bw=25):
    return make_request(rid, [(25, 25, sr), (25, 25, sr)], [(0, 1, bw)])


def test_triangle_accepts_with_one_hop(triangle):
    emb = embed_request(triangle, two_node_request(), GreedyMapper())
    assert len(emb.link_paths[0]) == 1
    assert emb.revenue == 125 and emb.cost == 125
    assert triangle.cpu_used.sum() == 50


def test_security_rejection():
    net = make_net(3, [(0, 1), (1, 2), (0, 2)], sl=1)
    before = net.snapshot()
    with pytest.raises(EmbeddingRejected) as info:
        embed_request(net, two_node_request(sr=2), GreedyMapper())
    assert info.value.reason == NO_FEASIBLE_NODE
    assert net.snapshot() == before


def test_path_rejection_rolls_back_node_reservations():
    net = make_net(3, [(0, 1), (1, 2)], bw=[10, 10])
    before = net.snapshot()
    with pytest.raises(EmbeddingRejected) as info:
        embed_request(net, two_node_request(bw=25), GreedyMapper())
    assert info.value.reason == NO_FEASIBLE_PATH
    assert net.snapshot() == before


def test_bfs_unique_path(path3):
    assert bfs_link_map(path3, 0, 2, 25) == [0, 1]


def test_bfs_detours_around_thin_link():
    # square A-B-C-D-A with A-B too thin
    net = make_net(4, [(0, 1), (1, 2), (2, 3), (0, 3)], bw=[10, 50, 50, 50])
    path = bfs_link_map(net, 0, 1, 25)
    assert path_nodes(net, path, 0) == [0, 3, 2, 1]


def test_bfs_none_when_demand_exceeds_everything(triangle):
    assert bfs_link_map(triangle, 0, 1, 100) is None


def test_bfs_requires_distinct_endpoints(triangle):
    with pytest.raises(ContractViolation):
        bfs_link_map(triangle, 1, 1, 0)


def test_bfs_tie_break_lowest_neighbor():
    # 0 reaches 3 via 1 or 2 in two hops
    net = make_net(4, [(0, 2), (0, 1), (2, 3), (1, 3)])
    assert path_nodes(net, bfs_link_map(net, 0, 3, 0), 0) == [0, 1, 3]


def test_bfs_minimal_hops_against_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(3, 9))
        net = random_connected_net(rng, n, p=0.45)
        src, dst = (int(x) for x in rng.choice(n, 2, replace=False))
        demand = int(rng.integers(0, 100))
        paths = all_simple_link_paths(net, src, dst, demand)
        got = bfs_link_map(net, src, dst, demand)
        if not paths:
            assert got is None
        else:
            assert got in paths
            assert len(got) == min(len(p) for p in paths)


def test_commit_release_roundtrip(triangle):
    vnr = two_node_request()
    before = triangle.snapshot()
    emb = embed_request(triangle, vnr, GreedyMapper())
    release(triangle, emb)
    assert triangle.snapshot() == before
    assert triangle.cpu_used.tolist() == [0, 0, 0]


def test_shared_link_usage_is_additive():
    net = make_net(4, [(0, 1)] + [(1, 2), (2, 3)], cpu=100, sto=100, bw=100)
    a = make_request(0, [(1, 1, 0), (1, 1, 0)], [(0, 1, 20)])
    b = make_request(1, [(1, 1, 0), (1, 1, 0)], [(0, 1, 30)])
    emb_a = Embedding(0, {0: 0, 1: 2}, [[0, 1]])
    emb_b = Embedding(1, {0: 1, 1: 3}, [[1, 2]])
    commit(net, emb_a, a)
    commit(net, emb_b, b)
    assert net.bw_used.tolist() == [20, 50, 30]


def test_double_commit_and_unknown_release(triangle):
    vnr = two_node_request()
    emb = embed_request(triangle, vnr, GreedyMapper())
    with pytest.raises(StateError):
        commit(triangle, emb, vnr)
    release(triangle, emb)
    with pytest.raises(StateError):
        release(triangle, emb)
    with pytest.raises(StateError):
        release(triangle, 12345)


def test_commit_reverifies_constraints(triangle):
    vnr = make_request(0, [(60, 1, 0), (1, 1, 0)], [(0, 1, 1)])
    bad = Embedding(0, {0: 0, 1: 1}, [[0]])
    before = triangle.snapshot()
    with pytest.raises(ContractViolation):
        commit(triangle, bad, vnr)
    noninjective = Embedding(0, {0: 0, 1: 0}, [[]])
    with pytest.raises(ContractViolation):
        commit(triangle, noninjective, make_request(0, [(1, 1, 0), (1, 1, 0)], [(0, 1, 1)]))
    assert triangle.snapshot() == before


class FixedMapper(NodeMapper):
    name = "fixed"

    def __init__(self, mapping):
        self.mapping = mapping

    def choose(self, net, vnr, node_map, vi):
        return self.mapping[vi]


class ReusingMapper(NodeMapper):
    name = "broken"

    def choose(self, net, vnr, node_map, vi):
        return 0


def test_buggy_mapper_cannot_corrupt_ledger(triangle):
    before = triangle.snapshot()
    with pytest.raises(ContractViolation):
        embed_request(triangle, two_node_request(), ReusingMapper())
    assert triangle.snapshot() == before


def test_brute_force_examples(triangle):
    ok, witness = brute_force_feasible(triangle, two_node_request())
    assert ok and len(set(witness.node_map.values())) == 2
    four = make_request(0, [(1, 1, 0)] * 4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    assert brute_force_feasible(triangle, four) == (False, None)


def test_brute_force_size_guard():
    net = make_net(9, [(i, i + 1) for i in range(8)])
    with pytest.raises(ContractViolation):
        brute_force_feasible(net, two_node_request())


def test_brute_force_finds_order_dependent_routing():
    # Square 0-1-2-3-0, every link 10 wide. Security levels pin the mapping to
    # v0->0, v1->2, v2->1. Routing (v0,v1) first takes 0-1-2 and leaves no room
    # for (v2,v1); routing (v2,v1) first lets (v0,v1) detour over 0-3-2.
    net = make_net(4, [(0, 1), (1, 2), (2, 3), (0, 3)], cpu=10, sto=10, sl=[3, 2, 1, 0], bw=10)
    vnr = make_request(0, [(1, 1, 3), (1, 1, 1), (1, 1, 2)], [(0, 1, 10), (2, 1, 10)])
    with pytest.raises(EmbeddingRejected) as info:
        embed_request(net.copy(), vnr, FixedMapper({0: 0, 1: 2, 2: 1}))
    assert info.value.reason == NO_FEASIBLE_PATH
    ok, witness = brute_force_feasible(net, vnr)
    assert ok
    assert witness.node_map == {0: 0, 1: 2, 2: 1}
    work = net.copy()
    commit(work, witness, vnr)
    assert work.bw_used.tolist() == [0, 10, 10, 10]


def test_engine_sound_against_oracle():
    rng = np.random.default_rng(2024)
    for i in range(60):
        net = random_connected_net(rng, int(rng.integers(3, 9)), p=0.5, cpu=(0, 60), sto=(0, 60), bw=(0, 60))
        vnr = random_request(rng, i)
        for mapper in (GreedyMapper(), RandomMapper(rng)):
            work = net.copy()
            try:
                emb = embed_request(work, vnr, mapper)
            except EmbeddingRejected:
                continue
            assert len(set(emb.node_map.values())) == len(vnr.nodes)
            assert brute_force_feasible(net, vnr)[0]
