import numpy as np
import pytest
from hypothesis import given, strategies as st

from secvne.network import (
    ContractViolation,
    SubstrateNetwork,
    VirtualNode,
    node_feasible,
    path_feasible,
    residual_bw,
    residual_cpu,
    residual_sto,
)

from conftest import make_net


def loaded(cpu_cap, cpu_used, sto_cap=50, sto_used=0, sl=3):
    net = make_net(2, [(0, 1)], cpu=cpu_cap, sto=sto_cap, sl=sl)
    net.cpu_used[0] = cpu_used
    net.sto_used[0] = sto_used
    return net


@pytest.mark.parametrize("cap,demands,expected", [(100, [30, 20], 50), (100, [], 100), (80, [80], 0)])
def test_residual_cpu(cap, demands, expected):
    assert residual_cpu(loaded(cap, sum(demands)), 0) == expected


@pytest.mark.parametrize("cap,demands,expected", [(60, [10, 15], 35), (50, [], 50), (50, [50], 0)])
def test_residual_sto(cap, demands, expected):
    assert residual_sto(loaded(100, 0, cap, sum(demands)), 0) == expected


@pytest.mark.parametrize("cap,carried,expected", [(100, [25, 25], 50), (70, [], 70), (70, [70], 0)])
def test_residual_bw(cap, carried, expected):
    net = make_net(2, [(0, 1)], bw=cap)
    net.bw_used[0] = sum(carried)
    assert residual_bw(net, 0) == expected


def test_residual_index_errors():
    net = make_net(2, [(0, 1)])
    with pytest.raises(IndexError):
        residual_cpu(net, 2)
    with pytest.raises(IndexError):
        residual_sto(net, -1)
    with pytest.raises(IndexError):
        residual_bw(net, 1)


@pytest.mark.parametrize(
    "sl,demand,expected",
    [
        (2, (30, 30, 2), True),
        (1, (30, 30, 2), False),
        (3, (50, 40, 0), True),
    ],
)
def test_node_feasible(sl, demand, expected):
    net = make_net(2, [(0, 1)], cpu=50, sto=40, sl=sl)
    assert node_feasible(net, 0, VirtualNode(0, *demand)) is expected


def test_path_feasible_examples():
    net = make_net(3, [(0, 1), (1, 2)], bw=[50, 50])
    assert path_feasible(net, [0, 1], 50)
    net2 = make_net(3, [(0, 1), (1, 2)], bw=[50, 30])
    assert not path_feasible(net2, [0, 1], 40)
    assert path_feasible(net2, [], 10_000)


def test_path_feasible_rejects_disconnected_path():
    net = make_net(4, [(0, 1), (2, 3), (1, 2)])
    with pytest.raises(ContractViolation):
        path_feasible(net, [0, 1], 1)


def test_network_rejects_bad_topology():
    with pytest.raises(ValueError):
        make_net(2, [(0, 0)])
    with pytest.raises(ValueError):
        make_net(2, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        make_net(2, [(0, 1)], sl=4)


def test_adjacency_consistent_with_links():
    net = make_net(4, [(2, 0), (0, 1), (3, 2)])
    for l, (u, v) in enumerate(net.endpoints):
        assert (v, l) in net.adjacency[u] and (u, l) in net.adjacency[v]
    assert net.adjacency[0] == sorted(net.adjacency[0])
    assert net.link_between(0, 2) == net.link_between(2, 0) == 0


@given(
    c=st.integers(0, 60), s=st.integers(0, 60), r=st.integers(0, 3),
    dc=st.integers(0, 60), ds=st.integers(0, 60), dr=st.integers(0, 3),
    sl=st.integers(0, 3),
)
def test_node_feasible_monotone(c, s, r, dc, ds, dr, sl):
    net = make_net(2, [(0, 1)], cpu=50, sto=50, sl=sl)
    if node_feasible(net, 0, VirtualNode(0, c, s, r)):
        assert node_feasible(net, 0, VirtualNode(0, min(c, dc), min(s, ds), min(r, dr)))


@given(st.lists(st.integers(0, 100), min_size=3, max_size=3), st.integers(0, 100))
def test_path_feasible_equals_per_link_scan(residuals, demand):
    net = make_net(4, [(0, 1), (1, 2), (2, 3)], bw=100)
    net.bw_used[:] = [100 - r for r in residuals]
    expected = True
    for l in range(3):
        if net.bw_capacity[l] - net.bw_used[l] < demand:
            expected = False
    assert path_feasible(net, [0, 1, 2], demand) is expected
